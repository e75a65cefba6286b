"""Information-theoretic quantities of a class ensemble, all in bits.

Everything is computed on the measured register: pass an ensemble through
``reduce_to_measured`` first (the functions here do it for you unless
``full_register=True``).
"""

from __future__ import annotations

import math
import hashlib
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .densemat import entropy_of_spectrum, hermitian_eigvals, shannon_entropy
from .ensembles import ClassEnsemble, StageLabel, diagonal_distribution, mix, reduce_to_measured

CLAMP_TOL = 1e-9
IDENTITY_TOL = 1e-8
DIVERGENCE_TOL = 1e-6


class CrossCheckError(ArithmeticError):
    """Two independent routes to the same quantity disagree."""


@dataclass(frozen=True)
class MetricsRow:
    stage: StageLabel
    H_Y: float
    S_rhoY: float
    C: float
    H_Y_given_J: float
    chi: float
    I_JY: float
    D_Y: float
    irrealism: float
    lower_bound: float
    upper_bound: float
    H_J: float = 0.0
    p_success: float | None = None
    digest: str = ""

    COLUMNS = ("H_Y", "S_rhoY", "C", "H_Y_given_J", "chi", "I_JY", "D_Y")

    def values(self) -> dict:
        return {k: getattr(self, k) for k in self.COLUMNS}

    def as_dict(self) -> dict:
        d = asdict(self)
        d["stage"] = self.stage.value
        return d


def _clamp(x: float, name: str) -> float:
    if x < -CLAMP_TOL:
        raise CrossCheckError(f"{name} = {x:.3e} is negative beyond numerical noise")
    return x if x > 0.0 else 0.0


def _y_given_j(joint: np.ndarray) -> float:
    pj = joint.sum(axis=1)
    return float(sum(p * shannon_entropy(row / p) for p, row in zip(pj, joint) if p > 0))


def _j_given_y(joint: np.ndarray) -> float:
    qy = joint.sum(axis=0)
    return float(sum(q * shannon_entropy(col / q) for q, col in zip(qy, joint.T) if q > 0))


def _discord_two_ways(joint: np.ndarray, s_y: float, s_classes: float) -> float:
    # chi - I(J;Y) against S(rho_Y) - [H(J) + sum p_j S(sigma_j)] + H(J|Y)
    h_y = shannon_entropy(joint.sum(axis=0))
    by_identity = (s_y - s_classes) - (h_y - _y_given_j(joint))
    by_definition = s_y - (shannon_entropy(joint.sum(axis=1)) + s_classes) + _j_given_y(joint)
    if abs(by_identity - by_definition) > DIVERGENCE_TOL:
        raise CrossCheckError(f"discord routes disagree: {by_identity} vs {by_definition}")
    return _clamp(by_identity, "D_Y")


def _prepare(e: ClassEnsemble, full_register: bool) -> ClassEnsemble:
    return e if full_register else reduce_to_measured(e)


def class_entropies(e: ClassEnsemble) -> np.ndarray:
    """``S(σ_j)`` for every class."""
    return np.array([entropy_of_spectrum(hermitian_eigvals(s)) for s in e.states])


def shannon_quantities(e: ClassEnsemble, full_register: bool = False) -> tuple[float, float, float]:
    """``(H(Y), H(Y|J), I(J;Y))`` for a computational-basis readout."""
    e = _prepare(e, full_register)
    joint = diagonal_distribution(e)
    h_y = shannon_entropy(joint.sum(axis=0))
    h_y_given_j = _y_given_j(joint)
    return h_y, h_y_given_j, _clamp(h_y - h_y_given_j, "I(J;Y)")


def holevo(e: ClassEnsemble, full_register: bool = False) -> float:
    """χ = S(Σ p_j σ_j) − Σ p_j S(σ_j)."""
    e = _prepare(e, full_register)
    s_mix = entropy_of_spectrum(hermitian_eigvals(mix(e)))
    return _clamp(s_mix - float(e.weights @ class_entropies(e)), "chi")


def coherence(e: ClassEnsemble, full_register: bool = False) -> float:
    """Relative entropy of coherence of ρ_Y: H(diag ρ_Y) − S(ρ_Y)."""
    e = _prepare(e, full_register)
    rho = mix(e)
    h_y = shannon_entropy(np.clip(np.real(np.diagonal(rho)), 0.0, None))
    return _clamp(h_y - entropy_of_spectrum(hermitian_eigvals(rho)), "C")


def discord_fixed_basis(e: ClassEnsemble, full_register: bool = False) -> float:
    """Computational-basis discord of ``Σ_j p_j |j><j| ⊗ σ_j``.

    Evaluated as χ − I(J;Y) and again from its definition
    ``S(ρ_Y) − S(ρ_JY) + H(J|Y)`` with ``S(ρ_JY) = H(J) + Σ p_j S(σ_j)``.
    Raises ``CrossCheckError`` if the two disagree by more than 1e-6.
    """
    e = _prepare(e, full_register)
    s_y = entropy_of_spectrum(hermitian_eigvals(mix(e)))
    s_classes = float(e.weights @ class_entropies(e))
    return _discord_two_ways(diagonal_distribution(e), s_y, s_classes)


def irrealism(e: ClassEnsemble, full_register: bool = False) -> float:
    return coherence(e, full_register) + discord_fixed_basis(e, full_register)


def fano_bounds(mutual_info: float, n_classes: int) -> tuple[float, float]:
    """``(upper, lower)`` bounds on the success probability for uniform J.

    upper = (I + 1) / log2|J| (Fano), lower = 2^{I − log2|J|}.
    """
    if n_classes < 2:
        raise ValueError("Fano bounds need at least two classes")
    log_j = math.log2(n_classes)
    return (mutual_info + 1.0) / log_j, 2.0 ** (mutual_info - log_j)


def metrics(e: ClassEnsemble, stage: StageLabel | str = StageLabel.FINAL,
            full_register: bool = False, p_success: float | None = None) -> MetricsRow:
    """All seven quantities plus irrealism and the mutual-information sandwich.

    One eigendecomposition per matrix; the two discord routes and the
    identities ``C = H(Y) − S(ρ_Y)``, ``D = χ − I`` are checked on the way.
    """
    e = _prepare(e, full_register)
    s_classes = float(e.weights @ class_entropies(e))
    return _assemble(StageLabel.parse(stage), mix(e), s_classes, diagonal_distribution(e),
                     e.digest(), p_success)


def streamed_metrics(weights: np.ndarray, states: Iterable[np.ndarray],
                     stage: StageLabel | str = StageLabel.FINAL,
                     with_success: bool = False) -> MetricsRow:
    """Same as ``metrics`` but consumes class states one at a time.

    Only ρ_Y and one class state are held in memory, which is what large
    analytic ensembles (hundreds of 2^10-dimensional states) need.  The
    digest matches ``ClassEnsemble.digest`` for the same data.
    ``with_success`` adds the MAP success probability of the readout.
    """
    weights = np.asarray(weights, dtype=float)
    h = hashlib.sha256()
    h.update(np.round(weights, 12).tobytes())
    rho = None
    rows = []
    s_classes = 0.0
    count = 0
    for p, sigma in zip(weights, states):
        sigma = np.asarray(sigma, dtype=np.complex128)
        if abs(np.trace(sigma).real - 1.0) > 1e-9:
            raise ValueError("class state does not have unit trace")
        h.update(np.round(sigma, 12).tobytes())
        s_classes += p * entropy_of_spectrum(hermitian_eigvals(sigma))
        rows.append(p * np.clip(np.real(np.diagonal(sigma)), 0.0, None))
        rho = p * sigma if rho is None else rho + p * sigma
        count += 1
    if count != len(weights) or count == 0:
        raise ValueError("number of class states does not match the weights")
    joint = np.array(rows)
    p_success = float(joint.max(axis=0).sum()) if with_success else None
    return _assemble(StageLabel.parse(stage), rho, s_classes, joint, h.hexdigest()[:16], p_success)


def _assemble(stage: StageLabel, rho: np.ndarray, s_classes: float, joint: np.ndarray,
              digest: str, p_success: float | None) -> MetricsRow:
    s_y = entropy_of_spectrum(hermitian_eigvals(rho))
    h_y = shannon_entropy(joint.sum(axis=0))
    h_j = shannon_entropy(joint.sum(axis=1))
    h_y_given_j = _y_given_j(joint)
    info = _clamp(h_y - h_y_given_j, "I(J;Y)")
    chi = _clamp(s_y - s_classes, "chi")
    coh = _clamp(h_y - s_y, "C")
    disc = _discord_two_ways(joint, s_y, s_classes)
    lower = s_y - h_y_given_j
    if lower > info + IDENTITY_TOL or info > chi + IDENTITY_TOL:
        raise CrossCheckError(f"sandwich violated: {lower} <= {info} <= {chi}")
    return MetricsRow(
        stage=stage,
        H_Y=h_y,
        S_rhoY=s_y,
        C=coh,
        H_Y_given_J=h_y_given_j,
        chi=chi,
        I_JY=info,
        D_Y=disc,
        irrealism=coh + disc,
        lower_bound=lower,
        upper_bound=chi,
        H_J=h_j,
        p_success=p_success,
        digest=digest,
    )
