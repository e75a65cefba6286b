"""Dense complex linear algebra for states and unitaries.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  Qubit
ordering follows the Kronecker convention: qubit 0 is the most significant
bit of a basis index.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

EPS_EIG = 1e-12
PSD_SLACK = 1e-10
HERMITIAN_TOL = 1e-10
DEFAULT_DIM_CAP = 2**12
CAP_ENV_VAR = "ORACLE_INFOLAB_CAP"


class DimensionCapError(ValueError):
    """Raised when an operation would build a matrix larger than the cap."""


def dimension_cap() -> int:
    value = os.environ.get(CAP_ENV_VAR)
    if value is None:
        return DEFAULT_DIM_CAP
    return int(value)


def check_dim(dim: int, cap: int | None = None) -> None:
    cap = dimension_cap() if cap is None else cap
    if dim > cap:
        raise DimensionCapError(f"dimension {dim} exceeds cap {cap}; raise {CAP_ENV_VAR} to allow it")


def as_matrix(a: object) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def tensor(a: np.ndarray, b: np.ndarray, cap: int | None = None) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    a = as_matrix(a)
    b = as_matrix(b)
    check_dim(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), cap)
    return np.kron(a, b)


def tensor_all(mats: Iterable[np.ndarray], cap: int | None = None) -> np.ndarray:
    mats = list(mats)
    if not mats:
        return np.ones((1, 1), dtype=np.complex128)
    return reduce(lambda x, y: tensor(x, y, cap), mats)


def tensor_power(a: np.ndarray, t: int, cap: int | None = None) -> np.ndarray:
    if t < 1:
        raise ValueError("tensor power needs t >= 1")
    return tensor_all([a] * t, cap)


def _check_dims(dim: int, dims: Sequence[int]) -> None:
    if int(np.prod(dims)) != dim:
        raise ValueError(f"subsystem dims {list(dims)} do not multiply to {dim}")


def _normalize_keep(keep: Iterable[int], n_sub: int) -> list[int]:
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set is empty")
    if keep[0] < 0 or keep[-1] >= n_sub:
        raise ValueError(f"keep indices {keep} out of range for {n_sub} subsystems")
    return keep


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists subsystem dimensions in Kronecker order.  The kept
    subsystems stay in their original relative order.
    """
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValueError("partial_trace needs a square matrix")
    _check_dims(rho.shape[0], dims)
    n_sub = len(dims)
    keep = _normalize_keep(keep, n_sub)
    if len(keep) == n_sub:
        return rho.copy()
    drop = [i for i in range(n_sub) if i not in keep]
    t = rho.reshape(list(dims) * 2)
    row_axes = keep + drop
    col_axes = [n_sub + i for i in keep] + [n_sub + i for i in drop]
    t = t.transpose(row_axes + col_axes)
    dk = int(np.prod([dims[i] for i in keep]))
    dd = int(np.prod([dims[i] for i in drop]))
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def reduce_pure(psi: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix of a pure state vector without forming ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    _check_dims(psi.shape[0], dims)
    n_sub = len(dims)
    keep = _normalize_keep(keep, n_sub)
    drop = [i for i in range(n_sub) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep]))
    m = psi.reshape(dims).transpose(keep + drop).reshape(dk, -1)
    return m @ dagger(m)


def reduce_pure_batch(psis: np.ndarray, dims: Sequence[int], keep: Iterable[int],
                      weights: np.ndarray | None = None) -> np.ndarray:
    """``Σ_i w_i Tr_drop |psi_i><psi_i|`` for a stack of state vectors (rows of ``psis``)."""
    psis = np.asarray(psis, dtype=np.complex128)
    count = psis.shape[0]
    _check_dims(psis.shape[1], dims)
    n_sub = len(dims)
    keep = _normalize_keep(keep, n_sub)
    drop = [i for i in range(n_sub) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep]))
    t = psis.reshape([count] + list(dims))
    t = t.transpose([0] + [1 + i for i in keep] + [1 + i for i in drop]).reshape(count, dk, -1)
    if weights is not None:
        t = t * np.sqrt(np.asarray(weights, dtype=float))[:, None, None]
    # Σ_i M_i M_i† as one contraction over (i, dropped index)
    flat = t.transpose(1, 0, 2).reshape(dk, -1)
    return flat @ dagger(flat)


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ dagger(q)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def _fix_phases(q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # first non-negligible component of every column made real positive
    q = q.copy()
    for col in range(q.shape[1]):
        v = q[:, col]
        idx = np.flatnonzero(np.abs(v) > tol)
        if idx.size:
            z = v[idx[0]]
            q[:, col] = v * (np.conj(z) / abs(z))
    return q


def hermitian_eig(a: np.ndarray) -> HermitianEigenDecomposition:
    """Eigendecomposition with ascending eigenvalues and a fixed eigenvector phase."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1] or not is_hermitian(a):
        raise ValueError("hermitian_eig needs a Hermitian matrix")
    h = 0.5 * (a + dagger(a))
    w, q = np.linalg.eigh(h)
    return HermitianEigenDecomposition(w, _fix_phases(q))


def hermitian_eigvals(a: np.ndarray) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1] or not is_hermitian(a):
        raise ValueError("hermitian_eigvals needs a Hermitian matrix")
    return np.linalg.eigvalsh(0.5 * (a + dagger(a)))


def shannon_entropy(p: Iterable[float], eps: float = EPS_EIG) -> float:
    """Shannon entropy in bits with the 0·log 0 = 0 convention."""
    p = np.asarray(list(p) if not isinstance(p, np.ndarray) else p, dtype=float).reshape(-1)
    p = p[p > eps]
    if p.size == 0:
        return 0.0
    h = float(-np.sum(p * np.log2(p)))
    return h if h > 0.0 else 0.0


def entropy_of_spectrum(eigenvalues: np.ndarray, eps: float = EPS_EIG) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size and lam.min() < -1e-8:
        raise ValueError(f"negative eigenvalue {lam.min():.3e} in a density matrix")
    return shannon_entropy(lam, eps)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -tr rho log2 rho, in bits."""
    rho = as_matrix(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-9:
        raise ValueError(f"density matrix trace {tr} != 1")
    return entropy_of_spectrum(hermitian_eigvals(rho))


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= tol)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def hadamard(n: int = 1) -> np.ndarray:
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    return tensor_power(h, n) if n > 1 else h


def qft_matrix(dim: int, inverse: bool = False) -> np.ndarray:
    """Fourier transform over Z/dim: entry (k, l) = e^{±2πi kl/dim}/√dim."""
    k = np.arange(dim)
    sign = -1.0 if inverse else 1.0
    return np.exp(sign * 2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim)


def basis_state(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return np.outer(psi, np.conj(psi))
