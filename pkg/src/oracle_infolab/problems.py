"""Oracle classification problems and the built-in families.

A problem is the data ``(F, class map, prior, U_f, m)``.  Bit oracles
``|x>|a> -> |x>|a ⊕ f(x)>`` are stored as index permutations so that whole
families (12,872 functions for four-bit Deutsch-Jozsa) can be simulated in
batches; the dense unitary is built only on request.  Families whose class
states are known in closed form (Simon, phase estimation) carry an
``analytic`` hook instead of an enumerated oracle list.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import hspkit
from .densemat import check_dim, dagger, is_unitary, projector
from .ensembles import ClassEnsemble, StageLabel

DJ_MAX_K = 4
BV_MAX_N = 6
SIMON_N_RANGE = (2, 4)
PHASE_N_RANGE = (2, 8)
PHASE_T_MAX = 10


class PriorKind:
    UNIFORM = "uniform"
    PARTITION_UNIFORM = "partition_uniform"
    CUSTOM = "custom"

    ALL = (UNIFORM, PARTITION_UNIFORM, CUSTOM)


def partition_uniform_prior(class_of: dict) -> dict:
    """``p_f = 1 / (|J| |A_j|)`` as exact fractions."""
    sizes: dict = {}
    for j in class_of.values():
        sizes[j] = sizes.get(j, 0) + 1
    n_classes = len(sizes)
    return {f: Fraction(1, n_classes * sizes[j]) for f, j in class_of.items()}


def uniform_prior(oracle_ids: Sequence) -> dict:
    return {f: Fraction(1, len(oracle_ids)) for f in oracle_ids}


def make_prior(kind: str, class_of: dict, weights: dict | None = None) -> dict:
    if kind == PriorKind.PARTITION_UNIFORM:
        return partition_uniform_prior(class_of)
    if kind == PriorKind.UNIFORM:
        return uniform_prior(list(class_of))
    if kind == PriorKind.CUSTOM:
        if weights is None:
            raise ValueError("custom prior needs explicit weights")
        return dict(weights)
    raise ValueError(f"unknown prior kind {kind!r}")


@dataclass(frozen=True)
class OracleProblem:
    """Oracle classification problem.

    For enumerated problems ``oracle_ids`` lists ``F`` and ``permutations``
    (when every ``U_f`` is a 0/1 permutation) holds one index map per oracle:
    ``U_f |i> = |perm[i]>``.  ``unitary_factory`` builds ``U_f`` for
    non-permutation oracles.  Analytic families set ``analytic`` to a
    callable returning the measured-register ensemble for a stage.
    """

    name: str
    family: str
    m: int
    classes: tuple
    oracle_ids: tuple = ()
    class_of: dict = field(default_factory=dict)
    prior: dict = field(default_factory=dict)
    permutations: np.ndarray | None = None
    unitary_factory: Callable | None = None
    analytic: Callable | None = None
    params: dict = field(default_factory=dict)
    queries: int = 1

    def __post_init__(self) -> None:
        if self.analytic is not None:
            return
        if not self.oracle_ids:
            raise ValueError("an enumerated problem needs at least one oracle")
        if set(self.class_of) != set(self.oracle_ids) or set(self.prior) != set(self.oracle_ids):
            raise ValueError("class map and prior must cover exactly the oracle set")
        used = set(self.class_of.values())
        missing = [j for j in self.classes if j not in used]
        if missing:
            raise ValueError(f"classes {missing} have no oracles")
        if used - set(self.classes):
            raise ValueError("class map uses labels outside the class list")
        total = float(sum(self.prior.values()))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"prior sums to {total}, not 1")
        if any(float(p) < 0 for p in self.prior.values()):
            raise ValueError("prior weights must be nonnegative")
        if self.permutations is None and self.unitary_factory is None:
            raise ValueError("need oracle permutations or a unitary factory")
        if self.permutations is not None:
            perms = np.asarray(self.permutations)
            if perms.shape != (len(self.oracle_ids), 2**self.m):
                raise ValueError(f"permutation table has shape {perms.shape}")
            ref = np.arange(2**self.m)
            if not all(np.array_equal(np.sort(row), ref) for row in perms):
                raise ValueError("oracle table row is not a permutation")

    @property
    def is_analytic(self) -> bool:
        return self.analytic is not None

    @property
    def dim(self) -> int:
        return 2**self.m

    def class_weight(self, j) -> float:
        if self.is_analytic:
            # analytic families carry class priors directly; uniform unless given
            priors = self.params.get("priors")
            if priors is None:
                return 1.0 / len(self.classes)
            return float(priors[list(self.classes).index(j)])
        return float(sum(p for f, p in self.prior.items() if self.class_of[f] == j))

    def class_weights(self) -> dict:
        return {j: self.class_weight(j) for j in self.classes}

    def members(self, j) -> list:
        return [f for f in self.oracle_ids if self.class_of[f] == j]

    def index_of(self, f) -> int:
        return self.oracle_ids.index(f)

    def unitary_of(self, f) -> np.ndarray:
        if self.permutations is not None:
            perm = self.permutations[self.index_of(f)]
            u = np.zeros((self.dim, self.dim), dtype=np.complex128)
            u[perm, np.arange(self.dim)] = 1.0
            return u
        if self.unitary_factory is None:
            raise ValueError(f"problem {self.name} has no explicit oracle unitaries")
        return np.asarray(self.unitary_factory(f), dtype=np.complex128)

    def check_unitaries(self, tol: float = 1e-10) -> bool:
        return all(is_unitary(self.unitary_of(f), tol) for f in self.oracle_ids)

    def class_entropy(self) -> float:
        w = np.array(list(self.class_weights().values()))
        w = w[w > 0]
        h = float(-(w * np.log2(w)).sum())
        return h if h > 0.0 else 0.0


def _bit_oracle_permutation(truth_table: Sequence[int], in_bits: int, out_bits: int) -> np.ndarray:
    values = np.asarray(truth_table, dtype=np.int64)
    if values.size != 2**in_bits:
        raise ValueError(f"truth table needs {2**in_bits} entries, got {values.size}")
    if values.min() < 0 or values.max() >= 2**out_bits:
        raise ValueError("truth table output does not fit in the output register")
    return hspkit.bit_oracle_permutation(values, 2**out_bits, combine="xor")


def bit_oracle_problem(name: str, family: str, truth_tables: dict, class_of: dict,
                       in_bits: int, out_bits: int, prior: dict,
                       classes: Sequence | None = None, params: dict | None = None) -> OracleProblem:
    ids = tuple(truth_tables)
    perms = np.stack([_bit_oracle_permutation(truth_tables[f], in_bits, out_bits) for f in ids])
    if classes is None:
        classes = tuple(dict.fromkeys(class_of[f] for f in ids))
    return OracleProblem(
        name=name,
        family=family,
        m=in_bits + out_bits,
        classes=tuple(classes),
        oracle_ids=ids,
        class_of=dict(class_of),
        prior=dict(prior),
        permutations=perms,
        params={"in_bits": in_bits, "out_bits": out_bits, **(params or {})},
    )


def _range_check(name: str, value: int, lo: int, hi: int) -> None:
    if not lo <= value <= hi:
        raise ValueError(f"{name}={value} outside the supported range {lo}..{hi}")


def build_dj(k: int, prior: str = PriorKind.PARTITION_UNIFORM, max_k: int = DJ_MAX_K) -> OracleProblem:
    """Deutsch-Jozsa: constant vs balanced functions on ``k`` bits.

    Functions are enumerated in lexicographic truth-table order and named
    by their truth table, e.g. ``"0110"``.
    """
    _range_check("k", k, 1, max_k)
    size = 2**k
    tables: dict = {}
    class_of: dict = {}
    for bits in itertools.product((0, 1), repeat=size):
        ones = sum(bits)
        if ones in (0, size):
            label = "c"
        elif 2 * ones == size:
            label = "b"
        else:
            continue
        fid = "".join(map(str, bits))
        tables[fid] = bits
        class_of[fid] = label
    return bit_oracle_problem(f"dj(k={k})", "dj", tables, class_of, k, 1,
                              make_prior(prior, class_of), classes=("b", "c"), params={"k": k})


def build_bv(n: int, max_n: int = BV_MAX_N) -> OracleProblem:
    """Bernstein-Vazirani: identify ``a`` from ``f_a(x) = a·x mod 2``."""
    _range_check("n", n, 1, max_n)
    tables: dict = {}
    xs = np.arange(2**n)
    for a in range(2**n):
        fid = format(a, f"0{n}b")
        tables[fid] = [bin(a & x).count("1") % 2 for x in xs]
    class_of = {f: f for f in tables}
    return bit_oracle_problem(f"bv(n={n})", "bv", tables, class_of, n, 1,
                              uniform_prior(list(tables)), params={"n": n})


def simon_labels(n: int) -> tuple:
    return tuple(format(s, f"0{n}b") for s in range(2**n))


def build_simon(n: int, n_range: tuple = SIMON_N_RANGE) -> OracleProblem:
    """Simon's problem over ``(Z/2)^n`` with ``s`` uniform on ``{0,1}^n`` (zero included).

    Class states come from the subgroup structure; no hiding function is
    enumerated.
    """
    _range_check("n", n, *n_range)
    group = hspkit.FiniteAbelianGroup.boolean(n)
    subgroups = hspkit.simon_subgroups(n)
    labels = simon_labels(n)
    priors = np.full(len(subgroups), 1.0 / len(subgroups))

    def analytic(stage: StageLabel) -> ClassEnsemble:
        e = hspkit.hsp_ensemble(group, subgroups, priors, stage, labels)
        return ClassEnsemble(e.labels, e.weights, e.states, (2,) * n, tuple(range(n)))

    return OracleProblem(
        name=f"simon(n={n})",
        family="simon",
        m=2 * n,
        classes=labels,
        analytic=analytic,
        params={"n": n, "group": group, "subgroups": subgroups, "priors": priors},
    )


def build_simon_explicit(n: int, all_functions: bool = False) -> OracleProblem:
    """Simon's problem with concrete hiding functions as bit oracles.

    By default one function per class (the reduced input-register state
    does not depend on which one); ``all_functions`` enumerates every
    hiding function, which is practical only for ``n = 2``.
    """
    group = hspkit.FiniteAbelianGroup.boolean(n)
    tables: dict = {}
    class_of: dict = {}
    for s, h in enumerate(hspkit.simon_subgroups(n)):
        label = format(s, f"0{n}b")
        funcs = hspkit.all_hiding_functions(group, h, 2**n) if all_functions else [hspkit.hiding_function(group, h)]
        for i, f in enumerate(funcs):
            fid = f"{label}:{i}"
            tables[fid] = f
            class_of[fid] = label
    return bit_oracle_problem(f"simon-explicit(n={n})", "simon_explicit", tables, class_of, n, n,
                              partition_uniform_prior(class_of), classes=simon_labels(n), params={"n": n})


def phase_oracle(f: float, t: int) -> np.ndarray:
    """``U_f |k> = e^{2πi f k} |k>`` on ``t`` qubits."""
    return np.diag(np.exp(2j * np.pi * f * np.arange(2**t)))


def phase_kernel(n: int, t: int, j: int) -> np.ndarray:
    """``2^n ∫_{j/2^n}^{(j+1)/2^n} e^{2πi f (k-k')} df`` for all ``k, k'``.

    The interval integral equals ``e^{2πi c Δ} sinc(Δ / 2^n)`` with ``c``
    the interval midpoint and ``Δ = k - k'``.
    """
    k = np.arange(2**t)
    delta = (k[:, None] - k[None, :]).astype(float)
    mid = (j + 0.5) / 2**n
    return np.exp(2j * np.pi * mid * delta) * np.sinc(delta / 2**n)


def phase_inverse_qft(t: int) -> np.ndarray:
    k = np.arange(2**t)
    return np.exp(-2j * np.pi * np.outer(k, k) / 2**t) / np.sqrt(2**t)


def sigma_phase_analytic(n: int, t: int, j: int, stage: StageLabel | str,
                         psi1: np.ndarray | None = None, w: np.ndarray | None = None) -> np.ndarray:
    """Class state of the phase-estimation problem for ``f`` uniform in class ``j``.

    ``psi1`` is the pre-query state ``V|ψ0>`` (default ``|+>^t``) and ``w``
    the post-query gate (default the inverse Fourier transform).  The
    post-query state is the Hadamard product of ``|ψ1><ψ1|`` with the
    interval kernel.
    """
    stage = StageLabel.parse(stage)
    if not 0 <= j < 2**n:
        raise ValueError(f"class {j} out of range for n={n}")
    check_dim(2**t)
    psi1 = np.full(2**t, 2 ** (-t / 2), dtype=np.complex128) if psi1 is None else np.asarray(psi1, dtype=np.complex128)
    pre = projector(psi1)
    if stage is StageLabel.PRE_QUERY:
        return pre
    post = pre * phase_kernel(n, t, j)
    if stage is StageLabel.POST_QUERY:
        return post
    w = phase_inverse_qft(t) if w is None else w
    fin = w @ post @ dagger(w)
    return 0.5 * (fin + dagger(fin))


def build_phase_estimation(n: int, t: int, n_range: tuple = PHASE_N_RANGE, t_max: int = PHASE_T_MAX) -> OracleProblem:
    """Phase estimation as classification: find the first ``n`` bits of ``f`` in [0, 1)."""
    _range_check("n", n, *n_range)
    if t < n:
        raise ValueError(f"t={t} must be at least n={n}")
    _range_check("t", t, n, t_max)
    labels = tuple(range(2**n))
    weights = np.full(2**n, 2.0**-n)

    def analytic(stage: StageLabel, psi1: np.ndarray | None = None, w: np.ndarray | None = None) -> ClassEnsemble:
        states = tuple(sigma_phase_analytic(n, t, j, stage, psi1, w) for j in labels)
        return ClassEnsemble(labels, weights, states, (2,) * t, tuple(range(t)))

    return OracleProblem(
        name=f"phase(n={n},t={t})",
        family="phase",
        m=t,
        classes=labels,
        analytic=analytic,
        unitary_factory=lambda f: phase_oracle(float(f), t),
        params={"n": n, "t": t},
    )


def phase_class_of(f: float, n: int) -> int:
    if not 0.0 <= f < 1.0:
        raise ValueError("phase must lie in [0, 1)")
    return int(math.floor(f * 2**n))
