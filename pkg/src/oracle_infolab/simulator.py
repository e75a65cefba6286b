"""Run a single-query (or non-adaptive t-query) algorithm over a whole oracle ensemble.

The per-oracle states ``U_f V|ψ0>`` and ``W U_f V|ψ0>`` are generated in
fixed-size chunks and folded into one density matrix per class, so memory
stays ``O(|J| · dim²)`` however many oracles the problem has.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .densemat import (
    check_dim,
    dagger,
    hadamard,
    is_unitary,
    reduce_pure_batch,
    tensor_all,
    tensor_power,
)
from .ensembles import ClassEnsemble, StageLabel, STAGES, diagonal_distribution
from .infometrics import MetricsRow, metrics, streamed_metrics
from .problems import OracleProblem, phase_inverse_qft, sigma_phase_analytic

CHUNK = 2048
STREAM_BYTES = 2**30  # ensembles above this size are never held in memory at once


@dataclass(frozen=True)
class AlgorithmSpec:
    """``|ψ0>``, ``V``, ``W`` and the measured qubits of a query algorithm on ``n`` qubits."""

    n: int
    psi0: np.ndarray
    V: np.ndarray
    W: np.ndarray
    measured: tuple
    queries: int = 1
    name: str = ""

    def __post_init__(self) -> None:
        dim = 2**self.n
        psi0 = np.asarray(self.psi0, dtype=np.complex128).reshape(-1)
        if psi0.shape != (dim,):
            raise ValueError(f"psi0 has {psi0.size} amplitudes, expected {dim}")
        if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
            raise ValueError("psi0 is not normalized")
        for name in ("V", "W"):
            u = np.asarray(getattr(self, name), dtype=np.complex128)
            if u.shape != (dim, dim) or not is_unitary(u):
                raise ValueError(f"{name} is not a {dim}x{dim} unitary")
            object.__setattr__(self, name, u)
        measured = tuple(sorted(set(int(q) for q in self.measured)))
        if not measured or measured[0] < 0 or measured[-1] >= self.n:
            raise ValueError(f"measured qubits {measured} out of range")
        if self.queries < 1:
            raise ValueError("queries must be >= 1")
        object.__setattr__(self, "psi0", psi0)
        object.__setattr__(self, "measured", measured)

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def psi1(self) -> np.ndarray:
        return self.V @ self.psi0


def basis_ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=np.complex128)
    v[int(bits, 2) if bits else 0] = 1.0
    return v


def kickback_algorithm(in_bits: int, out_bits: int = 1, extra: int = 0, name: str = "") -> AlgorithmSpec:
    """``|0>^in |1>^out``, ``V = H^⊗all``, ``W = H^⊗in ⊗ I``, measure the input bits.

    This is the Deutsch-Jozsa / Bernstein-Vazirani circuit.
    """
    n = in_bits + out_bits + extra
    psi0 = basis_ket("0" * in_bits + "1" * out_bits + "0" * extra)
    v = hadamard(in_bits + out_bits) if extra == 0 else tensor_all([hadamard(in_bits + out_bits), np.eye(2**extra)])
    w = tensor_all([hadamard(in_bits), np.eye(2 ** (n - in_bits))])
    return AlgorithmSpec(n, psi0, v, w, tuple(range(in_bits)), name=name or "kickback")


def qdj(k: int) -> AlgorithmSpec:
    return kickback_algorithm(k, 1, name=f"QDJ({k})")


def hsp_boolean_algorithm(n: int) -> AlgorithmSpec:
    """Simon's circuit: ``|0>^n|0>^n``, ``H^⊗n ⊗ I`` before and after, measure the input register."""
    h = tensor_all([hadamard(n), np.eye(2**n)])
    return AlgorithmSpec(2 * n, basis_ket("0" * 2 * n), h, h, tuple(range(n)), name=f"simon({n})")


def phase_algorithm(t: int) -> AlgorithmSpec:
    return AlgorithmSpec(t, basis_ket("0" * t), hadamard(t), phase_inverse_qft(t), tuple(range(t)),
                         name=f"phase(t={t})")


def standard_algorithm(problem: OracleProblem) -> AlgorithmSpec:
    """The textbook algorithm for a built-in family (lifted to ``problem.queries`` copies)."""
    fam = problem.family
    p = problem.params
    if fam in ("dj", "bv", "custom"):
        base = kickback_algorithm(p["in_bits"], p["out_bits"], name=f"{fam}-standard")
    elif fam in ("simon", "simon_explicit"):
        base = hsp_boolean_algorithm(p["n"])
    elif fam == "phase":
        base = phase_algorithm(p["t"])
    else:
        raise ValueError(f"no standard algorithm for family {fam!r}")
    return lift_spec(base, problem.queries) if problem.queries > 1 else base


def lift_spec(spec: AlgorithmSpec, t: int) -> AlgorithmSpec:
    """``t`` side-by-side copies of a single-query algorithm."""
    if t == 1:
        return spec
    check_dim(2 ** (spec.n * t))
    psi0 = spec.psi0
    for _ in range(t - 1):
        psi0 = np.kron(psi0, spec.psi0)
    measured = tuple(c * spec.n + q for c in range(t) for q in spec.measured)
    return AlgorithmSpec(spec.n * t, psi0, tensor_power(spec.V, t), tensor_power(spec.W, t), measured,
                         queries=spec.queries * t, name=f"{spec.name}^{t}")


def lift_t_queries(problem: OracleProblem, t: int) -> OracleProblem:
    """Replace every ``U_f`` by ``U_f^{⊗t}``; F, classes and prior are unchanged."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if t == 1:
        return problem
    check_dim(2 ** (problem.m * t))
    if problem.is_analytic:
        if problem.family == "phase":
            raise ValueError("phase estimation already sets its precision through t; lift is not defined")
        base = problem.analytic

        def analytic(stage: StageLabel) -> ClassEnsemble:
            e = base(stage)
            states = tuple(tensor_power(s, t) for s in e.states)
            dims = e.qubit_dims * t
            return ClassEnsemble(e.labels, e.weights, states, dims, tuple(range(len(dims))))

        return replace(problem, analytic=analytic, m=problem.m * t, queries=problem.queries * t,
                       name=f"{problem.name}^{t}")
    perms = None
    factory = None
    if problem.permutations is not None:
        base_perms = np.asarray(problem.permutations)
        d = base_perms.shape[1]
        perms = base_perms
        for _ in range(t - 1):
            perms = (perms[:, :, None] * d + base_perms[:, None, :]).reshape(perms.shape[0], -1)
    else:
        single = problem.unitary_factory

        def factory(f):
            return tensor_power(np.asarray(single(f), dtype=np.complex128), t)

    return replace(problem, m=problem.m * t, permutations=perms, unitary_factory=factory,
                   queries=problem.queries * t, name=f"{problem.name}^{t}")


def _apply_oracles(problem: OracleProblem, idx: np.ndarray, psi1: np.ndarray, n: int) -> np.ndarray:
    """Rows are ``(U_f ⊗ I) psi1`` for the oracles at positions ``idx``."""
    dm = 2**problem.m
    block = psi1.reshape(dm, -1)
    if problem.permutations is not None:
        perms = np.asarray(problem.permutations)[idx]
        out = np.empty((len(idx), dm, block.shape[1]), dtype=np.complex128)
        rows = np.arange(len(idx))[:, None]
        out[rows, perms, :] = block[None, :, :]
        return out.reshape(len(idx), -1)
    out = np.stack([problem.unitary_of(problem.oracle_ids[i]) @ block for i in idx])
    return out.reshape(len(idx), -1)


def run_stages(problem: OracleProblem, spec: AlgorithmSpec | None = None,
               full_register: bool = False, chunk: int = CHUNK) -> dict:
    """Class ensembles at the pre-query, post-query and final stages.

    By default every class state is traced down to the measured qubits as
    it is accumulated.  ``full_register=True`` keeps the whole register and
    records the measured mask on the ensemble instead.
    """
    if problem.is_analytic:
        return _run_analytic(problem, spec)
    spec = standard_algorithm(problem) if spec is None else spec
    if spec.n < problem.m:
        raise ValueError(f"algorithm has {spec.n} qubits but the oracle needs {problem.m}")
    dims = (2,) * spec.n
    keep = tuple(range(spec.n)) if full_register else spec.measured
    if full_register:
        check_dim(spec.dim)
    else:
        check_dim(2 ** len(keep))
    psi1 = spec.psi1
    labels = tuple(problem.classes)
    pos = {j: i for i, j in enumerate(labels)}
    kd = 2 ** len(keep)
    acc = {s: np.zeros((len(labels), kd, kd), dtype=np.complex128) for s in (StageLabel.POST_QUERY, StageLabel.FINAL)}
    p_f = np.array([float(problem.prior[f]) for f in problem.oracle_ids])
    cls = np.array([pos[problem.class_of[f]] for f in problem.oracle_ids])
    p_j = np.bincount(cls, weights=p_f, minlength=len(labels))
    w_t = spec.W.T
    for start in range(0, len(problem.oracle_ids), chunk):
        idx = np.arange(start, min(start + chunk, len(problem.oracle_ids)))
        post = _apply_oracles(problem, idx, psi1, spec.n)
        fin = post @ w_t
        for ci in np.unique(cls[idx]):
            sel = cls[idx] == ci
            w = p_f[idx][sel] / p_j[ci]
            acc[StageLabel.POST_QUERY][ci] += reduce_pure_batch(post[sel], dims, keep, w)
            acc[StageLabel.FINAL][ci] += reduce_pure_batch(fin[sel], dims, keep, w)
    pre_state = reduce_pure_batch(psi1[None, :], dims, keep)
    out_dims = tuple(dims[q] for q in keep)
    measured = tuple(keep.index(q) for q in spec.measured) if full_register else tuple(range(len(keep)))
    result = {StageLabel.PRE_QUERY: ClassEnsemble(labels, p_j, (pre_state,) * len(labels), out_dims, measured)}
    for stage, mats in acc.items():
        states = tuple(0.5 * (m + dagger(m)) for m in mats)
        result[stage] = ClassEnsemble(labels, p_j, states, out_dims, measured)
    return result


def _run_analytic(problem: OracleProblem, spec: AlgorithmSpec | None) -> dict:
    if problem.family == "phase" and spec is not None:
        return {s: problem.analytic(s, spec.psi1, spec.W) for s in STAGES}
    if spec is not None and spec.name != standard_algorithm(problem).name:
        raise ValueError(f"{problem.name} has closed-form states only for its standard algorithm")
    return {s: problem.analytic(s) for s in STAGES}


def mixed_state_direct(problem: OracleProblem, spec: AlgorithmSpec) -> np.ndarray:
    """``Σ_f p_f T_f|ψ0><ψ0|T_f†`` on the full register, one oracle at a time."""
    check_dim(spec.dim)
    rho = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    eye = np.eye(2 ** (spec.n - problem.m))
    for f in problem.oracle_ids:
        total = spec.W @ np.kron(problem.unitary_of(f), eye) @ spec.V
        psi = total @ spec.psi0
        rho += float(problem.prior[f]) * np.outer(psi, np.conj(psi))
    return rho


@dataclass(frozen=True)
class OutputRule:
    guess: dict = field(default_factory=dict)
    p_success: float = 0.0


def optimal_output_rule(final: ClassEnsemble) -> OutputRule:
    """Guess the class with the largest posterior for every outcome.

    Ties go to the smallest class label.
    """
    joint = diagonal_distribution(final)
    order = sorted(range(final.n_classes), key=lambda i: final.labels[i])
    ranked = joint[order]
    best = np.argmax(ranked, axis=0)
    guess = {y: final.labels[order[int(b)]] for y, b in enumerate(best)}
    return OutputRule(guess, float(joint.max(axis=0).sum()))


def post_query_ensemble(problem: OracleProblem, psi1: np.ndarray, chunk: int = CHUNK) -> ClassEnsemble:
    """Full-register ensemble ``σ_j = Σ_{f∈A_j} (p_f/p_j) U_f|ψ1><ψ1|U_f†`` for any pre-query state."""
    psi1 = np.asarray(psi1, dtype=np.complex128).reshape(-1)
    n = int(round(np.log2(psi1.size)))
    if 2**n != psi1.size or n < problem.m:
        raise ValueError("pre-query state must live on n >= m qubits")
    check_dim(psi1.size)
    psi1 = psi1 / np.linalg.norm(psi1)
    if problem.is_analytic:
        if problem.family != "phase":
            raise ValueError(f"{problem.name} has closed-form states only for its standard algorithm")
        return problem.analytic(StageLabel.POST_QUERY, psi1)
    dims = (2,) * n
    keep = tuple(range(n))
    labels = tuple(problem.classes)
    pos = {j: i for i, j in enumerate(labels)}
    p_f = np.array([float(problem.prior[f]) for f in problem.oracle_ids])
    cls = np.array([pos[problem.class_of[f]] for f in problem.oracle_ids])
    p_j = np.bincount(cls, weights=p_f, minlength=len(labels))
    acc = np.zeros((len(labels), psi1.size, psi1.size), dtype=np.complex128)
    for start in range(0, len(problem.oracle_ids), chunk):
        idx = np.arange(start, min(start + chunk, len(problem.oracle_ids)))
        post = _apply_oracles(problem, idx, psi1, n)
        for ci in np.unique(cls[idx]):
            sel = cls[idx] == ci
            acc[ci] += reduce_pure_batch(post[sel], dims, keep, p_f[idx][sel] / p_j[ci])
    states = tuple(0.5 * (m + dagger(m)) for m in acc)
    return ClassEnsemble(labels, p_j, states, dims, keep)


def stage_metrics(problem: OracleProblem, spec: AlgorithmSpec | None = None,
                  stages=STAGES, stream: bool | None = None) -> dict:
    """``MetricsRow`` per stage, with the MAP success probability on the final row.

    Phase estimation ensembles larger than ``STREAM_BYTES`` (or with
    ``stream=True``) are generated and consumed one class state at a time.
    """
    stages = [StageLabel.parse(s) for s in stages]
    if problem.family == "phase":
        n, t = problem.params["n"], problem.params["t"]
        size = len(problem.classes) * 16 * 4**t
        if stream or (stream is None and size > STREAM_BYTES):
            psi1 = None if spec is None else spec.psi1
            w = None if spec is None else spec.W
            weights = np.array([problem.class_weight(j) for j in problem.classes])
            out = {}
            for s in stages:
                gen = (sigma_phase_analytic(n, t, j, s, psi1, w) for j in problem.classes)
                out[s] = streamed_metrics(weights, gen, s, with_success=s is StageLabel.FINAL)
            return out
    ensembles = run_stages(problem, spec)
    out = {}
    for s in stages:
        p = optimal_output_rule(ensembles[s]).p_success if s is StageLabel.FINAL else None
        out[s] = metrics(ensembles[s], s, p_success=p)
    return out
