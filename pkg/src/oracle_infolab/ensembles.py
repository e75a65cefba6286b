"""Classical-quantum ensembles ``Σ_j p_j |j><j| ⊗ σ_j`` stored class by class."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .densemat import dagger, partial_trace

WEIGHT_TOL = 1e-9
TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-10


class StageLabel(str, enum.Enum):
    PRE_QUERY = "pre_query"
    POST_QUERY = "post_query"
    FINAL = "final"

    @classmethod
    def parse(cls, value: str | "StageLabel") -> "StageLabel":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"pre": cls.PRE_QUERY, "post": cls.POST_QUERY, "fin": cls.FINAL}
        if key in aliases:
            return aliases[key]
        return cls(key)


STAGES = (StageLabel.PRE_QUERY, StageLabel.POST_QUERY, StageLabel.FINAL)


@dataclass(frozen=True)
class ClassEnsemble:
    """Labeled ensemble of class states.

    ``qubit_dims`` gives the subsystem dimensions of every ``σ_j`` in
    Kronecker order (qubits are 2, group registers may be larger) and
    ``measured`` lists the subsystems that are read out.  Positivity of the
    states is checked lazily by the entropy routines, which reject
    eigenvalues below -1e-8.
    """

    labels: tuple
    weights: np.ndarray
    states: tuple
    qubit_dims: tuple = ()
    measured: tuple = ()
    _digest: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        states = tuple(np.asarray(s, dtype=np.complex128) for s in self.states)
        if not (len(labels) == len(weights) == len(states)) or not labels:
            raise ValueError("labels, weights and states must be nonempty and of equal length")
        if len(set(labels)) != len(labels):
            raise ValueError("class labels must be distinct")
        if np.any(weights <= 0):
            raise ValueError("every class weight must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"class weights sum to {weights.sum()}, not 1")
        dim = states[0].shape[0]
        for label, s in zip(labels, states):
            if s.shape != (dim, dim):
                raise ValueError(f"state of class {label!r} has shape {s.shape}, expected {(dim, dim)}")
            if not np.all(np.isfinite(s)):
                raise ValueError(f"state of class {label!r} has non-finite entries")
            if np.max(np.abs(s - dagger(s))) > HERMITIAN_TOL:
                raise ValueError(f"state of class {label!r} is not Hermitian")
            if abs(np.trace(s).real - 1.0) > TRACE_TOL:
                raise ValueError(f"state of class {label!r} has trace {np.trace(s).real}")
        dims = tuple(int(d) for d in self.qubit_dims) or _default_dims(dim)
        if int(np.prod(dims)) != dim:
            raise ValueError(f"subsystem dims {dims} do not match state dimension {dim}")
        measured = tuple(sorted(set(int(q) for q in self.measured))) if self.measured else tuple(range(len(dims)))
        if measured[0] < 0 or measured[-1] >= len(dims):
            raise ValueError(f"measured subsystems {measured} out of range")
        for s in states:
            s.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "qubit_dims", dims)
        object.__setattr__(self, "measured", measured)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    @property
    def is_reduced(self) -> bool:
        return len(self.measured) == len(self.qubit_dims)

    def digest(self) -> str:
        """Short SHA-256 checksum of weights and states rounded to 12 decimals."""
        if not self._digest:
            h = hashlib.sha256()
            h.update(np.round(self.weights, 12).tobytes())
            for s in self.states:
                h.update(np.round(s, 12).tobytes())
            self._digest.append(h.hexdigest()[:16])
        return self._digest[0]


def _default_dims(dim: int) -> tuple:
    n = dim.bit_length() - 1
    if 2**n == dim and n > 0:
        return (2,) * n
    return (dim,)


def from_states(states: dict | Sequence, weights: Sequence[float] | None = None,
                qubit_dims: Sequence[int] = (), measured: Sequence[int] = ()) -> ClassEnsemble:
    """Build an ensemble from ``{label: σ}`` (or a list) with optional weights."""
    if isinstance(states, dict):
        labels = tuple(states)
        mats = tuple(states.values())
    else:
        mats = tuple(states)
        labels = tuple(range(len(mats)))
    if weights is None:
        weights = np.full(len(mats), 1.0 / len(mats))
    return ClassEnsemble(labels, np.asarray(weights, dtype=float), mats, tuple(qubit_dims), tuple(measured))


def mix(e: ClassEnsemble) -> np.ndarray:
    """ρ_Y = Σ_j p_j σ_j."""
    rho = np.zeros((e.dim, e.dim), dtype=np.complex128)
    for p, s in zip(e.weights, e.states):
        rho += p * s
    return rho


def reduce_to_measured(e: ClassEnsemble) -> ClassEnsemble:
    """Trace every class state down to the measured subsystems."""
    if not e.measured:
        raise ValueError("measured mask is empty")
    if e.is_reduced:
        return e
    states = tuple(partial_trace(s, e.qubit_dims, e.measured) for s in e.states)
    dims = tuple(e.qubit_dims[i] for i in e.measured)
    return ClassEnsemble(e.labels, e.weights, states, dims, tuple(range(len(dims))))


def conjugate(e: ClassEnsemble, u: np.ndarray) -> ClassEnsemble:
    """Apply the same unitary to every class state: σ_j -> U σ_j U†."""
    ud = dagger(u)
    states = tuple(u @ s @ ud for s in e.states)
    states = tuple(0.5 * (s + dagger(s)) for s in states)
    return ClassEnsemble(e.labels, e.weights, states, e.qubit_dims, e.measured)


def diagonal_distribution(e: ClassEnsemble) -> np.ndarray:
    """Joint pmf ``Pr(j, y) = p_j <y|σ_j|y>`` as a ``(|J|, dim)`` array.

    Entries in ``[-1e-12, 0)`` are rounding noise and are clamped to zero.
    """
    diag = np.stack([np.real(np.diagonal(s)) for s in e.states])
    if diag.min() < -1e-12:
        raise ValueError(f"negative diagonal entry {diag.min():.3e} in a class state")
    diag = np.clip(diag, 0.0, None)
    return e.weights[:, None] * diag
