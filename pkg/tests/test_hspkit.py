import math

import numpy as np
import pytest
import scipy.linalg as sla

import oracles
from oracle_infolab import hspkit
from oracle_infolab.densemat import von_neumann_entropy
from oracle_infolab.hspkit import (
    FiniteAbelianGroup,
    Subgroup,
    all_subgroups,
    annihilator,
    character_table,
    hsp_class_state,
    hsp_ensemble,
    hsp_metrics_t,
    lambda_spectrum,
    lambda_spectrum_from_counts,
    lambda_spectrum_t,
    qft,
    simon_subgroups,
    spectrum_entropy_t,
)
from oracle_infolab.densemat import is_unitary
from oracle_infolab import reference

Z2 = FiniteAbelianGroup((2,))


def trivial(group):
    return Subgroup.generated_by(group, [])


def whole(group):
    return Subgroup.generated_by(group, range(group.order))


def test_character_tables():
    assert np.allclose(character_table(Z2), [[1, 1], [1, -1]])
    assert np.allclose(character_table(FiniteAbelianGroup.boolean(2)), oracles.kron_all([[[1, 1], [1, -1]]] * 2))
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(character_table(FiniteAbelianGroup((3,)))[1], [1, w, w**2])


@pytest.mark.parametrize("orders", [(2,), (3,), (2, 2), (4,), (2, 3), (4, 4), (2, 8)])
def test_qft_unitary(orders):
    assert is_unitary(qft(FiniteAbelianGroup(orders)), tol=1e-10)


def test_group_validation():
    with pytest.raises(ValueError):
        FiniteAbelianGroup((1, 2))


def test_annihilator_extremes():
    for orders in [(2, 2), (3,), (2, 4)]:
        g = FiniteAbelianGroup(orders)
        assert annihilator(g, trivial(g)).order == g.order
        assert annihilator(g, whole(g)).elements == (0,)


def test_simon_annihilator_brute_force():
    for n in (2, 3, 4):
        g = FiniteAbelianGroup.boolean(n)
        for s, h in enumerate(simon_subgroups(n)):
            perp = annihilator(g, h)
            brute = {x for x in range(2**n) if bin(x & s).count("1") % 2 == 0}
            assert set(perp.elements) == brute
            if s:
                assert perp.order == 2 ** (n - 1)


@pytest.mark.parametrize("orders", [(2, 2, 2), (4,), (2, 4), (3, 3)])
def test_character_set_invariants(orders):
    g = FiniteAbelianGroup(orders)
    table = character_table(g)
    for h in all_subgroups(g):
        perp = annihilator(g, h)
        assert perp.order * h.order == g.order
        assert np.max(np.abs(table[np.ix_(perp.elements, h.elements)] - 1)) <= 1e-12


def test_subgroup_validation():
    g = FiniteAbelianGroup((4,))
    with pytest.raises(ValueError):
        Subgroup(g, (0, 1))


def test_trivial_subgroup_post_query():
    g = FiniteAbelianGroup((2, 3))
    assert np.allclose(hsp_class_state(g, trivial(g), "post"), np.eye(6) / 6)


@pytest.mark.parametrize("orders", [(2, 2), (4,), (2, 4), (3, 3), (2, 2, 2)])
def test_class_state_entropy(orders):
    g = FiniteAbelianGroup(orders)
    for h in all_subgroups(g):
        expected = math.log2(g.order) - math.log2(h.order)
        for stage in ("post", "final"):
            assert abs(von_neumann_entropy(hsp_class_state(g, h, stage)) - expected) <= 1e-9


def test_simon_n2_final_brute_force():
    g = FiniteAbelianGroup.boolean(2)
    for s, h in enumerate(simon_subgroups(2)):
        if s == 0:
            continue
        brute = oracles.hsp_states_brute((2, 2), oracles._simon_subgroup(2, s))["final"]
        ours = hsp_class_state(g, h, "final")
        assert np.allclose(ours, brute, atol=1e-12)
        support = [x for x in range(4) if bin(x & s).count("1") % 2 == 0]
        assert np.allclose(np.diagonal(ours)[support], 0.5)


@pytest.mark.parametrize("orders", [(2, 2), (4,), (3, 3), (2, 4)])
def test_final_states_exactly_diagonal(orders):
    g = FiniteAbelianGroup(orders)
    for h in all_subgroups(g):
        s = hsp_class_state(g, h, "final")
        assert np.max(np.abs(s - np.diag(np.diagonal(s)))) <= 1e-12


def test_class_state_bad_stage():
    with pytest.raises(ValueError):
        hsp_class_state(Z2, trivial(Z2), "pre")


def test_lambda_single_trivial_subgroup():
    g = FiniteAbelianGroup((2, 4))
    assert np.allclose(lambda_spectrum(g, [trivial(g)]), 1 / 8)


def test_lambda_simon_n2_entropy():
    lam = lambda_spectrum(FiniteAbelianGroup.boolean(2), simon_subgroups(2))
    lam = lam[lam > 0]
    assert abs(-(lam * np.log2(lam)).sum() - 1.8802) <= 5e-4


@pytest.mark.parametrize("orders", [(2, 2, 2), (4,), (3, 3), (2, 4), (4, 4)])
def test_lambda_matches_direct_diagonalization(orders):
    g = FiniteAbelianGroup(orders)
    subs = all_subgroups(g)
    rng = np.random.default_rng(len(subs))
    priors = rng.dirichlet(np.ones(len(subs)))
    e = hsp_ensemble(g, subs, priors, "post")
    rho = sum(p * s for p, s in zip(priors, e.states))
    lam = lambda_spectrum(g, subs, priors)
    assert abs(lam.sum() - 1) <= 1e-12
    assert np.max(np.abs(np.sort(lam) - np.sort(np.real(sla.eigvals(rho))))) <= 1e-10


@pytest.mark.parametrize("orders", [(2, 2), (4,), (3, 3), (2, 4)])
def test_lambda_from_counts_uniform(orders):
    g = FiniteAbelianGroup(orders)
    subs = all_subgroups(g)
    assert np.allclose(lambda_spectrum_from_counts(g, subs), lambda_spectrum(g, subs), atol=1e-12)


def test_lambda_t_reduces_and_sums():
    g = FiniteAbelianGroup.boolean(2)
    subs = simon_subgroups(2)
    assert np.allclose(lambda_spectrum_t(g, subs, None, 1), lambda_spectrum(g, subs))
    for t in (2, 3, 4):
        assert abs(lambda_spectrum_t(g, subs, None, t).sum() - 1) <= 1e-12
    with pytest.raises(ValueError):
        lambda_spectrum_t(g, subs, None, 13)


def test_lambda_t_paper_values():
    g2, g3 = FiniteAbelianGroup.boolean(2), FiniteAbelianGroup.boolean(3)
    assert abs(spectrum_entropy_t(g2, simon_subgroups(2), None, 2) - 3.6157) <= 5e-4
    assert abs(spectrum_entropy_t(g3, simon_subgroups(3), None, 8) - 19.9517) <= 5e-4


def test_metrics_t_paper_values():
    row = hsp_metrics_t(FiniteAbelianGroup.boolean(2), simon_subgroups(2), None, 4)
    assert abs(row.I_JY - 1.6777) <= 5e-4
    row = hsp_metrics_t(FiniteAbelianGroup.boolean(4), simon_subgroups(4), None, 6)
    assert abs(row.I_JY - 3.7383) <= 5e-4
    assert row.C == 0.0 and row.D_Y == 0.0


def test_metrics_t_monotone_and_below_class_entropy():
    for n, t_max in ((2, 12), (3, 8), (4, 6)):
        g = FiniteAbelianGroup.boolean(n)
        values = [hsp_metrics_t(g, simon_subgroups(n), None, t).I_JY for t in range(1, t_max + 1)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
        assert max(values) < n


def test_metrics_t_brute_force_small():
    # explicit kron powers of the brute-force final states
    n, t = 2, 3
    states = {s: oracles.simon_class_state_tensor(n, s, t) for s in range(2**n)}
    ref = oracles.metrics_from_states(states, {s: 1 / 4 for s in states})
    row = hsp_metrics_t(FiniteAbelianGroup.boolean(n), simon_subgroups(n), None, t)
    for col in ("H_Y", "H_Y_given_J", "chi", "I_JY"):
        assert getattr(row, col) == pytest.approx(ref[col], abs=1e-10)
    assert abs(ref["C"]) <= 1e-10 and abs(ref["D_Y"]) <= 1e-10


def test_pattern_entropy_matches_full_spectrum():
    for orders, t in [((2, 2), 6), ((4,), 4), ((3, 3), 3), ((2, 2, 2), 4)]:
        g = FiniteAbelianGroup(orders)
        subs = all_subgroups(g)
        lam = lambda_spectrum_t(g, subs, None, t)
        lam = lam[lam > 0]
        assert abs(-(lam * np.log2(lam)).sum() - spectrum_entropy_t(g, subs, None, t)) <= 1e-10


@pytest.mark.slow
def test_full_spectrum_n2_t12():
    g = FiniteAbelianGroup.boolean(2)
    lam = lambda_spectrum_t(g, simon_subgroups(2), None, 12)
    assert lam.size == 2**24
    lam = lam[lam > 0]
    direct = -(lam * np.log2(lam)).sum()
    assert abs(direct - spectrum_entropy_t(g, simon_subgroups(2), None, 12)) <= 1e-9
    assert abs(direct - reference.SIMON_T[(2, 12)]["H_Y"]) <= 5e-4


def test_all_subgroups_counts():
    for orders, count in [((2, 2, 2, 2), 67), ((4, 4), 15), ((2, 8), 11), ((16,), 5), ((3, 3), 6)]:
        assert len(all_subgroups(FiniteAbelianGroup(orders))) == count


def test_hiding_function_constant_on_cosets():
    g = FiniteAbelianGroup((2, 4))
    for h in all_subgroups(g):
        f = hspkit.hiding_function(g, h)
        for coset in h.cosets():
            assert len(set(f[list(coset)])) == 1
        assert len(set(f)) == g.order // h.order
