"""Optimal post-query measurements and pre-query state search.

A measurement basis is stored as the unitary ``W`` applied before a
computational-basis readout, so outcome ``y`` of class ``j`` has
probability ``(W σ_j W†)_{yy}`` and the rows of ``W`` are the basis bras.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .densemat import dagger, entropy_of_spectrum, hermitian_eig, hermitian_eigvals, is_unitary, shannon_entropy
from .ensembles import ClassEnsemble, conjugate, mix, reduce_to_measured
from .infometrics import class_entropies, discord_fixed_basis, holevo

ORTHOGONAL_TOL = 1e-10
COMMUTE_TOL = 1e-9
DIAGONAL_TOL = 1e-8
MONOMIAL_TOL = 1e-10
DEFAULT_RESTARTS = 32
DEFAULT_TOL = 1e-7
DEFAULT_SEED = 20240607
PSI1_DIM_CAP = 2**5


@dataclass(frozen=True)
class OptimalityCertificate:
    orthogonal_support: bool
    pairwise_commuting: bool
    gram_overlaps: np.ndarray
    commutator_norms: np.ndarray

    def as_dict(self) -> dict:
        return {
            "orthogonal_support": self.orthogonal_support,
            "pairwise_commuting": self.pairwise_commuting,
            "max_overlap": float(_offdiag_max(self.gram_overlaps)),
            "max_commutator": float(_offdiag_max(self.commutator_norms)),
            "gram_overlaps": self.gram_overlaps.tolist(),
            "commutator_norms": self.commutator_norms.tolist(),
        }


@dataclass(frozen=True)
class MeasurementBasis:
    W: np.ndarray

    def __post_init__(self) -> None:
        if not is_unitary(self.W, 1e-10):
            raise ValueError("measurement basis is not unitary")


@dataclass(frozen=True)
class DiscordResult:
    basis: MeasurementBasis
    D_min: float
    converged: bool
    seed: int
    restarts: int
    sweeps: list = field(default_factory=list)
    winner: str = ""


class NonConvergenceError(RuntimeError):
    def __init__(self, result: DiscordResult):
        super().__init__(f"discord minimization did not converge (best D = {result.D_min:.3e})")
        self.result = result


def _offdiag_max(m: np.ndarray) -> float:
    if m.shape[0] < 2:
        return 0.0
    return float(np.max(np.abs(m[~np.eye(m.shape[0], dtype=bool)])))


def certify(e: ClassEnsemble) -> OptimalityCertificate:
    """Check the orthogonal-support and pairwise-commutation conditions.

    Orthogonal support forces commutation for PSD states, so a certificate
    with ``orthogonal_support`` always reports ``pairwise_commuting`` too.
    """
    states = e.states
    k = len(states)
    gram = np.zeros((k, k))
    comm = np.zeros((k, k))
    for a in range(k):
        for b in range(a, k):
            gram[a, b] = gram[b, a] = np.real(np.trace(states[a] @ states[b]))
            if a != b:
                c = states[a] @ states[b] - states[b] @ states[a]
                comm[a, b] = comm[b, a] = np.max(np.abs(c))
    orthogonal = _offdiag_max(gram) <= ORTHOGONAL_TOL
    commuting = orthogonal or _offdiag_max(comm) <= COMMUTE_TOL
    return OptimalityCertificate(orthogonal, commuting, gram, comm)


def _offdiag_mass(m: np.ndarray) -> float:
    off = m - np.diag(np.diagonal(m))
    return float(np.max(np.abs(off), initial=0.0))


def simultaneous_diagonalizer(e: ClassEnsemble, seed: int = DEFAULT_SEED,
                              max_depth: int = 8) -> MeasurementBasis:
    """Common eigenbasis of pairwise-commuting class states.

    Diagonalizes a generic positive combination ``Σ c_j σ_j``; eigenspaces
    that stay degenerate are split recursively with fresh coefficients.
    """
    if not certify(e).pairwise_commuting:
        raise ValueError("class states do not pairwise commute")
    rng = np.random.default_rng(seed)
    q = _split(list(e.states), np.eye(e.dim, dtype=np.complex128), rng, max_depth)
    return MeasurementBasis(dagger(q))


def _split(states: list, basis: np.ndarray, rng: np.random.Generator, depth: int) -> np.ndarray:
    restricted = [dagger(basis) @ s @ basis for s in states]
    if basis.shape[1] == 1 or depth == 0 or all(_offdiag_mass(r) <= 1e-12 for r in restricted):
        return basis
    coeffs = rng.uniform(1.0, 2.0, size=len(states))
    combo = sum(c * r for c, r in zip(coeffs, restricted))
    dec = hermitian_eig(0.5 * (combo + dagger(combo)))
    lam, vecs = dec.eigenvalues, dec.eigenvectors
    scale = max(1.0, float(np.max(np.abs(lam))))
    cols = []
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i] - lam[i - 1] > 1e-9 * scale:
            block = basis @ vecs[:, start:i]
            cols.append(block if i - start == 1 else _split(states, block, rng, depth - 1))
            start = i
    return np.hstack(cols)


def _mutual_information(cond: np.ndarray, weights: np.ndarray) -> float:
    """I(J;Y) from ``cond[j, y] = Pr(y | j)``."""
    cond = np.clip(cond, 0.0, None)
    h_y = shannon_entropy(weights @ cond)
    h_y_j = float(sum(p * shannon_entropy(row) for p, row in zip(weights, cond)))
    return h_y - h_y_j


def discord_in_basis(e: ClassEnsemble, w: np.ndarray) -> float:
    """Fixed-basis discord after rotating every class state by ``w``."""
    return discord_fixed_basis(conjugate(reduce_to_measured(e), w))


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.maximum(p, 0.0)
    return p * np.log2(p + (p <= 1e-300))


class _PairObjective:
    """Mutual information as a function of one two-level rotation of rows ``a, b``.

    Rows become ``r_a' = c r_a + s e^{iφ} r_b`` and
    ``r_b' = -s e^{-iφ} r_a + c r_b``; only outcomes ``a`` and ``b`` move.
    """

    def __init__(self, w: np.ndarray, states: np.ndarray, weights: np.ndarray,
                 cond: np.ndarray, a: int, b: int):
        ra, rb = w[a], w[b]
        sa = states @ np.conj(ra)
        sb = states @ np.conj(rb)
        self.A = np.real(sa @ ra)
        self.B = np.real(sb @ rb)
        self.X = sb @ ra
        self.weights = weights
        rest = np.delete(cond, [a, b], axis=1)
        self.base_hy = -float(np.sum(_xlogx(weights @ rest)))
        self.base_hyj = -float(weights @ np.sum(_xlogx(rest), axis=1))

    def probs(self, theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c, s = np.cos(theta)[..., None], np.sin(theta)[..., None]
        cross = 2 * c * s * np.real(np.exp(-1j * phi)[..., None] * self.X)
        pa = c * c * self.A + s * s * self.B + cross
        pb = s * s * self.A + c * c * self.B - cross
        return pa, pb

    def __call__(self, theta, phi) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape)
        pa, pb = self.probs(theta, phi)
        qa, qb = pa @ self.weights, pb @ self.weights
        h_y = self.base_hy - _xlogx(qa) - _xlogx(qb)
        h_yj = self.base_hyj - (_xlogx(pa) + _xlogx(pb)) @ self.weights
        return h_y - h_yj


_ZOOM = np.linspace(-1.0, 1.0, 9)


def _zoom(obj, theta: float, phi: float, best: float, tol: float) -> tuple[float, float, float]:
    """Refine a grid maximum on successively finer 9x9 grids around it.

    The search runs over z = θ e^{iφ} in Cartesian form, which stays regular
    at θ = 0 where φ is undefined.
    """
    x, y = theta * math.cos(phi), theta * math.sin(phi)
    half = _THETA_GRID[1]
    while half > tol:
        gx = x + half * _ZOOM[:, None] * np.ones_like(_ZOOM)
        gy = y + half * _ZOOM[None, :] * np.ones_like(gx)
        vals = obj(np.hypot(gx, gy), np.arctan2(gy, gx))
        i, k = np.unravel_index(np.argmax(vals), vals.shape)
        if vals[i, k] > best:
            x, y, best = gx[i, k], gy[i, k], float(vals[i, k])
        half /= 4
    return math.hypot(x, y), math.atan2(y, x), best


def _rotate_rows(w: np.ndarray, a: int, b: int, theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    ra, rb = w[a].copy(), w[b].copy()
    w = w.copy()
    w[a] = c * ra + s * np.exp(1j * phi) * rb
    w[b] = -s * np.exp(-1j * phi) * ra + c * rb
    return w


_THETA_GRID = np.linspace(0.0, math.pi / 2, 17)
_PHI_GRID = np.linspace(0.0, 2 * math.pi, 8, endpoint=False)


def _coordinate_ascent(w: np.ndarray, states: np.ndarray, weights: np.ndarray,
                       tol: float, max_sweeps: int, ceiling: float = np.inf) -> tuple[np.ndarray, float, int, bool]:
    # ceiling: a value no basis can exceed (χ); reaching it ends the search
    d = w.shape[0]
    line_tol = 1e-6

    def cond_of(w):
        return np.real(np.einsum("ya,jab,yb->jy", w, states, np.conj(w)))

    value = _mutual_information(cond_of(w), weights)
    if value >= ceiling - 1e-12:
        return w, value, 0, True
    for sweep in range(1, max_sweeps + 1):
        start_value = value
        for a in range(d - 1):
            for b in range(a + 1, d):
                cond = cond_of(w)
                obj = _PairObjective(w, states, weights, cond, a, b)
                current = float(obj(np.array(0.0), 0.0))
                grid = obj(_THETA_GRID[:, None] * np.ones_like(_PHI_GRID), _PHI_GRID[None, :])
                i, k = np.unravel_index(np.argmax(grid), grid.shape)
                theta, phi = _THETA_GRID[i], _PHI_GRID[k]
                theta, phi, best = _zoom(obj, _THETA_GRID[i], _PHI_GRID[k], grid[i, k], line_tol)
                if best > current + 1e-15:
                    w = _rotate_rows(w, a, b, theta, phi)
        # re-orthonormalize to stop drift from many tiny rotations
        q, r = np.linalg.qr(w.T)
        w = (q * (np.diag(r) / np.abs(np.diag(r)))).T
        value = _mutual_information(cond_of(w), weights)
        if value - start_value <= tol or value >= ceiling - 1e-12:
            return w, value, sweep, True
    return w, value, max_sweeps, False


def _haar(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def minimize_discord(e: ClassEnsemble, restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                     seed: int = DEFAULT_SEED, candidates: list | None = None,
                     seed_bases: bool = True, max_sweeps: int = 200,
                     raise_on_failure: bool = False) -> DiscordResult:
    """Minimize the discord over projective measurements by maximizing I(J;Y).

    Local search by coordinate ascent over two-level rotations (angle and
    phase, grid scan then a shrinking local grid).  Starts from the
    computational basis, the eigenbasis of ρ_Y and any ``candidates`` when
    ``seed_bases`` is set, then from ``restarts`` Haar-random bases drawn
    from ``seed``.  The best basis found is returned; ``converged`` is
    False if any start hit ``max_sweeps``.
    """
    if restarts < 0 or (restarts == 0 and not seed_bases and not candidates):
        raise ValueError("need at least one start: restarts, seed_bases or candidates")
    e = reduce_to_measured(e)
    states = np.stack(e.states)
    weights = np.asarray(e.weights)
    chi = holevo(e)
    rng = np.random.default_rng(seed)
    d = e.dim
    starts: list[tuple[str, np.ndarray]] = []
    for i, c in enumerate(candidates or []):
        starts.append((f"candidate{i}", np.asarray(c, dtype=np.complex128)))
    if seed_bases:
        starts.append(("computational", np.eye(d, dtype=np.complex128)))
        starts.append(("rho_eigenbasis", dagger(hermitian_eig(mix(e)).eigenvectors)))
    starts.extend((f"random{i}", _haar(d, rng)) for i in range(restarts))
    best_w, best_i, best_name = None, -np.inf, ""
    sweeps = []
    all_converged = True
    for name, w0 in starts:
        w, value, n_sweeps, ok = _coordinate_ascent(w0, states, weights, tol, max_sweeps, chi)
        sweeps.append(n_sweeps)
        all_converged &= ok
        if value > best_i:
            best_w, best_i, best_name = w, value, name
        if best_i >= chi - 1e-12:
            break  # I = χ: no basis can do better
    d_min = discord_in_basis(e, best_w)
    result = DiscordResult(MeasurementBasis(best_w), max(min(d_min, chi), 0.0), all_converged,
                           seed, restarts, sweeps, best_name)
    if raise_on_failure and not all_converged:
        raise NonConvergenceError(result)
    return result


def i_max(e: ClassEnsemble, restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
          seed: int = DEFAULT_SEED, **kwargs) -> float:
    """Largest I(J;Y) reachable from this post-query ensemble: χ minus the minimized discord."""
    e = reduce_to_measured(e)
    if certify(e).pairwise_commuting:
        w = simultaneous_diagonalizer(e, seed).W
        d_min = discord_in_basis(e, w)
    else:
        d_min = minimize_discord(e, restarts, tol, seed, **kwargs).D_min
    return max(holevo(e) - d_min, 0.0)


@dataclass(frozen=True)
class Psi1Result:
    psi1: np.ndarray
    I_max: float
    evaluations: int
    trials: int
    history: list


def _i_max_with_basis(e: ClassEnsemble, restarts: int, seed: int,
                      warm: np.ndarray | None, quick: bool) -> tuple[float, np.ndarray]:
    if certify(e).pairwise_commuting:
        w = simultaneous_diagonalizer(e, seed).W
        return max(holevo(e) - discord_in_basis(e, w), 0.0), w
    cands = None if warm is None else [warm]
    if quick and warm is not None:
        # one start from the previous basis instead of a full restart set
        res = minimize_discord(e, 0, seed=seed, candidates=cands, seed_bases=False)
    else:
        res = minimize_discord(e, restarts, seed=seed, candidates=cands)
    return max(holevo(e) - res.D_min, 0.0), res.basis.W


def search_psi1(problem, trials: int = 4, restarts: int = 2, steps: int = 600,
                seed: int = DEFAULT_SEED, n_qubits: int | None = None,
                initial: list | None = None, cap: int = PSI1_DIM_CAP,
                min_step: float = 1e-6) -> Psi1Result:
    """Best-effort search for a pre-query state with large ``I_max``.

    Random-direction hill climbing on the unit sphere from ``trials``
    random starts (plus any ``initial`` states).  Accepted moves feed a
    momentum term so the walk can follow the narrow ridges that lead to
    orthogonal support; the step grows after accepted moves and shrinks
    after rejected ones.  Candidates whose
    Holevo quantity cannot beat the current value are rejected without the
    inner discord minimization, which is otherwise warm-started from the
    current best basis.  The winner is re-scored with ``restarts`` fresh
    random bases.  No global optimality is claimed.
    """
    from .simulator import post_query_ensemble

    n = problem.m if n_qubits is None else n_qubits
    d = 2**n
    if d > cap:
        raise ValueError(f"pre-query search is limited to dimension {cap}")
    rng = np.random.default_rng(seed)
    h_j = problem.class_entropy()
    evaluations = 0

    def evaluate(psi, floor, warm, fresh):
        nonlocal evaluations
        e = post_query_ensemble(problem, psi)
        if holevo(e) <= floor + 1e-12:
            return -np.inf, warm
        evaluations += 1
        return _i_max_with_basis(e, restarts, seed, warm, quick=not fresh)

    def normalize(v):
        return v / np.linalg.norm(v)

    starts = [normalize(np.asarray(s, dtype=np.complex128).reshape(-1)) for s in (initial or [])]
    starts += [normalize(rng.standard_normal(d) + 1j * rng.standard_normal(d)) for _ in range(trials)]
    best_psi, best_val = None, -np.inf
    history = []
    for psi in starts:
        val, basis = evaluate(psi, -1.0, None, True)
        step = 0.5
        momentum = np.zeros(d, dtype=np.complex128)
        for _ in range(steps):
            if val >= h_j - 1e-10 or step < min_step:
                break
            direction = momentum + (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / math.sqrt(2 * d)
            cand = normalize(psi + step * direction)
            cval, cbasis = evaluate(cand, val, basis, False)
            if cval > val + 1e-14:
                psi, val, basis = cand, cval, cbasis
                momentum = 0.7 * momentum + 0.45 * direction
                step = min(step * 1.5, 1.0)
            else:
                momentum *= 0.5
                step *= 0.8
        val, _ = evaluate(psi, -1.0, basis, True)
        history.append(float(val))
        if val > best_val:
            best_psi, best_val = psi, val
    return Psi1Result(best_psi, float(best_val), evaluations, len(starts), history)


def row_support(v: np.ndarray, tol: float = MONOMIAL_TOL) -> int:
    """Largest number of non-negligible entries in any row or column."""
    nz = np.abs(np.asarray(v)) > tol
    return int(max(nz.sum(axis=0).max(), nz.sum(axis=1).max()))


def monomial_check(v: np.ndarray, tol: float = MONOMIAL_TOL) -> bool:
    """True iff every row and every column has exactly one nonzero entry."""
    nz = np.abs(np.asarray(v)) > tol
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def class_state_entropies(e: ClassEnsemble) -> np.ndarray:
    return class_entropies(reduce_to_measured(e))


def spectrum_entropy(rho: np.ndarray) -> float:
    return entropy_of_spectrum(hermitian_eigvals(rho))
