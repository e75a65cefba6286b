"""Finite abelian groups and closed-form states for the hidden subgroup problem.

Group elements of ``G = Z/p_1 × ... × Z/p_M`` are integer tuples, indexed in
mixed radix with the first component most significant.  For ``(Z/2)^n`` the
index is therefore the usual bit string with qubit 0 first.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .densemat import check_dim, shannon_entropy
from .ensembles import ClassEnsemble, StageLabel

SPECTRUM_T_CAP = 2**24
LATTICE_CAP = 64


@dataclass(frozen=True)
class FiniteAbelianGroup:
    cycle_orders: tuple

    def __post_init__(self) -> None:
        orders = tuple(int(p) for p in self.cycle_orders)
        if not orders or any(p < 2 for p in orders):
            raise ValueError("every cycle order must be >= 2")
        object.__setattr__(self, "cycle_orders", orders)

    @classmethod
    def boolean(cls, n: int) -> "FiniteAbelianGroup":
        return cls((2,) * n)

    @property
    def order(self) -> int:
        return math.prod(self.cycle_orders)

    @cached_property
    def elements(self) -> np.ndarray:
        """All elements as an ``(|G|, M)`` integer array in index order."""
        grids = np.indices(self.cycle_orders).reshape(len(self.cycle_orders), -1)
        return grids.T.copy()

    @cached_property
    def _strides(self) -> np.ndarray:
        strides = np.ones(len(self.cycle_orders), dtype=np.int64)
        for i in range(len(self.cycle_orders) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.cycle_orders[i + 1]
        return strides

    def index(self, g: Sequence[int] | np.ndarray) -> int | np.ndarray:
        g = np.asarray(g, dtype=np.int64) % np.asarray(self.cycle_orders)
        return g @ self._strides if g.ndim > 1 else int(g @ self._strides)

    def element(self, index: int) -> tuple:
        return tuple(int(x) for x in self.elements[index])

    @cached_property
    def addition_table(self) -> np.ndarray:
        """``table[a, b]`` is the index of ``a + b``."""
        e = self.elements
        summed = (e[:, None, :] + e[None, :, :]) % np.asarray(self.cycle_orders)
        return self.index(summed.reshape(-1, e.shape[1])).reshape(self.order, self.order)

    @cached_property
    def negation(self) -> np.ndarray:
        return self.index((-self.elements) % np.asarray(self.cycle_orders))

    @cached_property
    def pairing(self) -> np.ndarray:
        """Integer phases: ``χ_g(l) = exp(2πi pairing[g, l] / L)`` with ``L = lcm(p_i)``."""
        big_l = math.lcm(*self.cycle_orders)
        scale = np.array([big_l // p for p in self.cycle_orders], dtype=np.int64)
        e = self.elements.astype(np.int64)
        return ((e * scale) @ e.T) % big_l

    @property
    def exponent(self) -> int:
        return math.lcm(*self.cycle_orders)


@dataclass(frozen=True)
class Subgroup:
    group: FiniteAbelianGroup
    elements: tuple

    def __post_init__(self) -> None:
        elems = tuple(sorted(set(int(i) for i in self.elements)))
        g = self.group
        if not elems or elems[0] != 0:
            raise ValueError("a subgroup must contain the identity")
        if any(i < 0 or i >= g.order for i in elems):
            raise ValueError("subgroup element index out of range")
        s = set(elems)
        table = g.addition_table
        for a in elems:
            if int(g.negation[a]) not in s:
                raise ValueError("subset is not closed under inverses")
            for b in elems:
                if int(table[a, b]) not in s:
                    raise ValueError("subset is not closed under addition")
        if g.order % len(elems):
            raise ValueError("subgroup order must divide the group order")
        object.__setattr__(self, "elements", elems)

    @property
    def order(self) -> int:
        return len(self.elements)

    @classmethod
    def generated_by(cls, group: FiniteAbelianGroup, generators: Iterable[int]) -> "Subgroup":
        return cls(group, tuple(_closure(group, {0}, generators)))

    def cosets(self) -> list[tuple]:
        table = self.group.addition_table
        seen: set[int] = set()
        out = []
        for g in range(self.group.order):
            if g in seen:
                continue
            coset = tuple(sorted(int(table[g, h]) for h in self.elements))
            seen.update(coset)
            out.append(coset)
        return out

    def contains(self, index: int) -> bool:
        return int(index) in set(self.elements)


def _closure(group: FiniteAbelianGroup, start: set, generators: Iterable[int]) -> set:
    table = group.addition_table
    elems = set(start) | {0}
    frontier = list(set(int(x) for x in generators) - elems)
    elems.update(frontier)
    while frontier:
        new = []
        current = list(elems)
        for a in frontier:
            for b in current:
                c = int(table[a, b])
                if c not in elems:
                    elems.add(c)
                    new.append(c)
        frontier = new
    return elems


def simon_subgroups(n: int) -> list[Subgroup]:
    """``H_s = {0, s}`` for every ``s`` in ``{0,1}^n`` (``s = 0`` gives the trivial group)."""
    g = FiniteAbelianGroup.boolean(n)
    return [Subgroup(g, (0, s)) for s in range(2**n)]


def all_subgroups(group: FiniteAbelianGroup) -> list[Subgroup]:
    """Every subgroup of a small group, sorted by (order, elements)."""
    if group.order > LATTICE_CAP:
        raise ValueError(f"subgroup enumeration is limited to |G| <= {LATTICE_CAP}")
    found = {(0,)}
    frontier = [frozenset({0})]
    while frontier:
        nxt = []
        for h in frontier:
            for g in range(group.order):
                if g in h:
                    continue
                bigger = frozenset(_closure(group, set(h), [g]))
                key = tuple(sorted(bigger))
                if key not in found:
                    found.add(key)
                    nxt.append(bigger)
        frontier = nxt
    subs = [Subgroup(group, k) for k in found]
    return sorted(subs, key=lambda s: (s.order, s.elements))


def character_table(group: FiniteAbelianGroup) -> np.ndarray:
    """``table[g, l] = χ_g(l)``."""
    check_dim(group.order)
    return np.exp(2j * np.pi * group.pairing / group.exponent)


def qft(group: FiniteAbelianGroup) -> np.ndarray:
    """Fourier transform over ``G``: the character table divided by √|G|."""
    return character_table(group) / np.sqrt(group.order)


@dataclass(frozen=True)
class CharacterSet:
    subgroup: Subgroup
    elements: tuple

    @property
    def order(self) -> int:
        return len(self.elements)

    def indicator(self) -> np.ndarray:
        ind = np.zeros(self.subgroup.group.order, dtype=bool)
        ind[list(self.elements)] = True
        return ind


def annihilator(group: FiniteAbelianGroup, h: Subgroup) -> CharacterSet:
    """Characters ``χ_g`` with ``χ_g(x) = 1`` for every ``x`` in ``h``."""
    if h.group != group:
        raise ValueError("subgroup belongs to a different group")
    phases = group.pairing[:, list(h.elements)]
    members = tuple(int(g) for g in np.flatnonzero(np.all(phases == 0, axis=1)))
    return CharacterSet(h, members)


def hsp_class_state(group: FiniteAbelianGroup, h: Subgroup, stage: StageLabel | str) -> np.ndarray:
    """Input-register state after tracing the output register.

    Post-query the state is ``(1/|G|) Σ_{g - g' ∈ H} |g><g'|``; after the
    Fourier transform it is diagonal with weight ``|H|/|G|`` on ``H⊥``.
    Neither depends on which hiding function was queried.
    """
    stage = StageLabel.parse(stage)
    check_dim(group.order)
    if stage is StageLabel.POST_QUERY:
        same_coset = np.zeros((group.order, group.order), dtype=bool)
        for coset in h.cosets():
            same_coset[np.ix_(coset, coset)] = True
        return same_coset.astype(np.complex128) / group.order
    if stage is StageLabel.FINAL:
        diag = annihilator(group, h).indicator() * (h.order / group.order)
        return np.diag(diag.astype(np.complex128))
    raise ValueError("hsp_class_state covers the post-query and final stages only")


def hsp_pre_query_state(group: FiniteAbelianGroup) -> np.ndarray:
    return np.full((group.order, group.order), 1.0 / group.order, dtype=np.complex128)


def hsp_ensemble(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup],
                 priors: Sequence[float] | None, stage: StageLabel | str,
                 labels: Sequence | None = None) -> ClassEnsemble:
    stage = StageLabel.parse(stage)
    priors = _uniform(len(subgroups)) if priors is None else np.asarray(priors, dtype=float)
    labels = tuple(range(len(subgroups))) if labels is None else tuple(labels)
    if stage is StageLabel.PRE_QUERY:
        states = tuple(hsp_pre_query_state(group) for _ in subgroups)
    else:
        states = tuple(hsp_class_state(group, h, stage) for h in subgroups)
    return ClassEnsemble(labels, priors, states, (group.order,), (0,))


def _uniform(k: int) -> np.ndarray:
    return np.full(k, 1.0 / k)


def _check_priors(subgroups: Sequence[Subgroup], priors: Sequence[float] | None) -> np.ndarray:
    p = _uniform(len(subgroups)) if priors is None else np.asarray(priors, dtype=float)
    if len(p) != len(subgroups):
        raise ValueError("need one prior weight per subgroup")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("priors must sum to 1")
    return p


def lambda_spectrum(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup],
                    priors: Sequence[float] | None = None) -> np.ndarray:
    """Eigenvalue of ρ_Y on the character basis vector ``v_χ``, indexed by χ."""
    p = _check_priors(subgroups, priors)
    lam = np.zeros(group.order)
    for pj, h in zip(p, subgroups):
        lam += annihilator(group, h).indicator() * (pj * h.order)
    return lam / group.order


def lambda_spectrum_from_counts(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup]) -> np.ndarray:
    """Uniform-prior spectrum from the subgroup-membership counts ``c_g``.

    ``λ_χ = <c|v_χ> / (√|G| |J|)`` where ``v_χ`` is the conjugated character
    row over √|G|.
    """
    counts = np.zeros(group.order)
    for h in subgroups:
        counts[list(h.elements)] += 1
    v = np.conj(character_table(group)) / np.sqrt(group.order)
    lam = v @ counts / (np.sqrt(group.order) * len(subgroups))
    return np.real_if_close(lam, tol=1e6).real


def lambda_spectrum_t(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup],
                      priors: Sequence[float] | None, t: int,
                      cap: int = SPECTRUM_T_CAP) -> np.ndarray:
    """Spectrum of ``Σ_j p_j σ_j^{⊗t}`` indexed by χ-tuples (row-major)."""
    if t < 1:
        raise ValueError("t must be >= 1")
    size = group.order**t
    if size > cap:
        raise ValueError(f"|G|^t = {size} exceeds the spectrum cap {cap}")
    p = _check_priors(subgroups, priors)
    lam = np.zeros(size)
    for pj, h in zip(p, subgroups):
        ind = annihilator(group, h).indicator().astype(float)
        vec = ind
        for _ in range(t - 1):
            vec = np.multiply.outer(vec, ind).reshape(-1)
        lam += pj * (h.order / group.order) ** t * vec
    return lam


def membership_patterns(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup]) -> dict[int, int]:
    """Count characters by the bitmask of annihilators they lie in."""
    masks = np.zeros(group.order, dtype=np.int64)
    for j, h in enumerate(subgroups):
        masks |= annihilator(group, h).indicator().astype(np.int64) << j
    values, counts = np.unique(masks, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def tuple_pattern_counts(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup], t: int) -> dict[int, int]:
    """Number of χ-tuples of length ``t`` whose common annihilator set is each mask.

    A tuple lies in ``H_j⊥`` for exactly the classes in the AND of its
    members' masks, so counts compose by AND-convolution with exact
    integers.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    single = membership_patterns(group, subgroups)
    counts = dict(single)
    for _ in range(t - 1):
        nxt: dict[int, int] = {}
        for a, ca in counts.items():
            for b, cb in single.items():
                m = a & b
                nxt[m] = nxt.get(m, 0) + ca * cb
        counts = nxt
    return counts


def spectrum_entropy_t(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup],
                       priors: Sequence[float] | None, t: int) -> float:
    """S(Σ_j p_j σ_j^{⊗t}) in bits, without enumerating χ-tuples."""
    p = _check_priors(subgroups, priors)
    ratios = np.array([h.order / group.order for h in subgroups]) ** t
    total = 0.0
    for mask, count in sorted(tuple_pattern_counts(group, subgroups, t).items()):
        lam = sum(p[j] * ratios[j] for j in range(len(subgroups)) if mask >> j & 1)
        if lam > 0:
            total -= count * lam * math.log2(lam)
    return max(total, 0.0)


def conditional_entropy_single(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup],
                               priors: Sequence[float] | None = None) -> float:
    """H(Y|J) = log|G| - Σ_j p_j log|H_j| for the final stage of one query."""
    p = _check_priors(subgroups, priors)
    return math.log2(group.order) - float(sum(pj * math.log2(h.order) for pj, h in zip(p, subgroups)))


def hsp_metrics_t(group: FiniteAbelianGroup, subgroups: Sequence[Subgroup],
                  priors: Sequence[float] | None, t: int):
    """Final-stage metrics after ``t`` non-adaptive queries.

    Class states are diagonal in the character basis, so coherence and
    fixed-basis discord vanish and ``I = χ``.
    """
    from .infometrics import MetricsRow

    p = _check_priors(subgroups, priors)
    h_y = spectrum_entropy_t(group, subgroups, p, t)
    h_y_given_j = t * conditional_entropy_single(group, subgroups, p)
    info = max(h_y - h_y_given_j, 0.0)
    h_j = shannon_entropy(p)
    return MetricsRow(
        stage=StageLabel.FINAL,
        H_Y=h_y,
        S_rhoY=h_y,
        C=0.0,
        H_Y_given_J=h_y_given_j,
        chi=info,
        I_JY=info,
        D_Y=0.0,
        irrealism=0.0,
        lower_bound=info,
        upper_bound=info,
        H_J=h_j,
    )


def hiding_function(group: FiniteAbelianGroup, h: Subgroup, labels: Sequence[int] | None = None) -> np.ndarray:
    """A concrete function constant on the cosets of ``h`` and distinct across them.

    ``labels[c]`` is the output assigned to the ``c``-th coset (in coset
    enumeration order); by default cosets get outputs 0, 1, 2, ...
    """
    cosets = h.cosets()
    labels = list(range(len(cosets))) if labels is None else list(labels)
    if len(set(labels)) != len(cosets):
        raise ValueError("need one distinct output per coset")
    f = np.empty(group.order, dtype=np.int64)
    for coset, value in zip(cosets, labels):
        f[list(coset)] = value
    return f


def all_hiding_functions(group: FiniteAbelianGroup, h: Subgroup, out_size: int) -> Iterable[np.ndarray]:
    """Every function ``G -> {0..out_size-1}`` hiding ``h`` (injective on cosets)."""
    n_cosets = group.order // h.order
    for labels in itertools.permutations(range(out_size), n_cosets):
        yield hiding_function(group, h, labels)


def bit_oracle_permutation(f_values: np.ndarray, out_size: int, combine: str = "xor") -> np.ndarray:
    """Index permutation of ``|g>|x> -> |g>|x ⊕ f(g)>`` on an input × output register."""
    f_values = np.asarray(f_values, dtype=np.int64)
    g = np.repeat(np.arange(f_values.size), out_size)
    x = np.tile(np.arange(out_size), f_values.size)
    if combine == "xor":
        y = x ^ f_values[g]
    elif combine == "add":
        y = (x + f_values[g]) % out_size
    else:
        raise ValueError(f"unknown combine rule {combine!r}")
    if y.max() >= out_size:
        raise ValueError("oracle output does not fit in the output register")
    return g * out_size + y
