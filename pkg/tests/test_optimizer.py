import numpy as np
import pytest

from oracle_infolab.densemat import hadamard, random_unitary
from oracle_infolab.ensembles import StageLabel, from_states
from oracle_infolab.hspkit import FiniteAbelianGroup, qft, simon_subgroups
from oracle_infolab.infometrics import holevo, metrics
from oracle_infolab.optimizer import (
    MeasurementBasis,
    NonConvergenceError,
    certify,
    discord_in_basis,
    i_max,
    minimize_discord,
    monomial_check,
    row_support,
    search_psi1,
    simultaneous_diagonalizer,
)
from oracle_infolab.problems import bit_oracle_problem, build_bv, build_dj, build_phase_estimation, build_simon
from oracle_infolab.simulator import run_stages, standard_algorithm


def post(problem):
    return run_stages(problem)[StageLabel.POST_QUERY]


def trivial_problem(count=2):
    tables = {f"f{i}": [0, 0] for i in range(count)}
    return bit_oracle_problem("trivial", "custom", tables, {f: f for f in tables},
                              1, 1, {f: 1 / count for f in tables})


def offdiag(m):
    return float(np.max(np.abs(m - np.diag(np.diagonal(m)))))


def test_certify_dj_k2():
    cert = certify(post(build_dj(2)))
    assert cert.orthogonal_support and cert.pairwise_commuting
    assert cert.gram_overlaps.shape == (2, 2)


def test_certify_hsp_commuting_not_orthogonal():
    for n in (2, 3):
        cert = certify(post(build_simon(n)))
        assert cert.pairwise_commuting and not cert.orthogonal_support


def test_certify_single_class():
    cert = certify(from_states([np.eye(2) / 2]))
    assert cert.orthogonal_support and cert.pairwise_commuting


def test_diagonalizer_already_diagonal():
    rng = np.random.default_rng(0)
    e = from_states([np.diag(rng.dirichlet(np.ones(4))) for _ in range(3)])
    w = simultaneous_diagonalizer(e).W
    assert monomial_check(w)


def test_diagonalizer_simon_n2_characters():
    e = post(build_simon(2))
    w = simultaneous_diagonalizer(e).W
    for s in e.states:
        assert offdiag(w @ s @ w.conj().T) <= 1e-8
    p = np.abs(w @ qft(FiniteAbelianGroup.boolean(2)).conj()) ** 2
    assert np.allclose(np.sort(p, axis=1)[:, -1], 1.0, atol=1e-8)
    assert np.allclose(p.sum(axis=0), 1.0, atol=1e-8)


def test_diagonalizer_random_commuting_pair():
    rng = np.random.default_rng(1)
    u = random_unitary(8, rng)
    states = [u @ np.diag(rng.dirichlet(np.ones(8))) @ u.conj().T for _ in range(2)]
    e = from_states([0.5 * (s + s.conj().T) for s in states])
    w = simultaneous_diagonalizer(e).W
    for s in e.states:
        assert offdiag(w @ s @ w.conj().T) <= 1e-8


def test_diagonalizer_rejects_non_commuting():
    e = from_states([np.diag([1.0, 0.0]), np.full((2, 2), 0.5)])
    with pytest.raises(ValueError):
        simultaneous_diagonalizer(e)


def test_minimize_discord_commuting_zero():
    rng = np.random.default_rng(2)
    u = random_unitary(4, rng)
    states = [u @ np.diag(rng.dirichlet(np.ones(4))) @ u.conj().T for _ in range(3)]
    e = from_states([0.5 * (s + s.conj().T) for s in states])
    res = minimize_discord(e, restarts=3, seed_bases=False)
    assert res.D_min <= 1e-6
    assert abs(res.D_min - discord_in_basis(e, simultaneous_diagonalizer(e).W)) <= 1e-6
    assert res.converged and res.seed is not None


def test_minimize_discord_bv_post_query():
    e = post(build_bv(2))
    gram = certify(e).gram_overlaps
    assert np.allclose(gram, np.eye(4), atol=1e-12)
    assert minimize_discord(e, restarts=2).D_min <= 1e-6


def test_minimize_discord_phase_below_qft_basis():
    e = post(build_phase_estimation(2, 2))
    w = standard_algorithm(build_phase_estimation(2, 2)).W
    fixed = discord_in_basis(e, w)
    assert abs(fixed - 0.5954) <= 5e-4
    res = minimize_discord(e, restarts=4)
    assert res.D_min <= fixed + 1e-9


def test_minimize_discord_deterministic():
    e = from_states([np.full((3, 3), 1 / 3), np.diag([0.5, 0.5, 0.0])])
    a = minimize_discord(e, restarts=3, seed=11)
    b = minimize_discord(e, restarts=3, seed=11)
    assert np.array_equal(a.basis.W, b.basis.W) and a.D_min == b.D_min


def test_minimize_discord_needs_a_start():
    with pytest.raises(ValueError):
        minimize_discord(from_states([np.eye(2) / 2]), restarts=0, seed_bases=False)


def test_minimize_discord_non_convergence_flag():
    rng = np.random.default_rng(4)
    states = []
    for _ in range(3):
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        s = g @ g.conj().T
        states.append(s / np.trace(s).real)
    e = from_states(states)
    res = minimize_discord(e, restarts=1, max_sweeps=1, seed_bases=False, tol=0.0)
    assert not res.converged
    with pytest.raises(NonConvergenceError):
        minimize_discord(e, restarts=1, max_sweeps=1, seed_bases=False, tol=0.0, raise_on_failure=True)


def test_i_max_dj_k2():
    assert i_max(post(build_dj(2))) == pytest.approx(1.0, abs=1e-9)


def test_i_max_single_class():
    assert i_max(from_states([np.full((2, 2), 0.5)])) == 0.0


def test_i_max_simon_n2():
    e = post(build_simon(2))
    value = i_max(e)
    assert abs(value - 0.6302) <= 5e-4
    assert value == pytest.approx(holevo(e), abs=1e-9)


@pytest.mark.parametrize("problem", [build_dj(1), build_dj(3), build_bv(3), build_simon(3),
                                     build_phase_estimation(2, 3)], ids=lambda p: p.name)
def test_i_max_bounds(problem):
    e = post(problem)
    value = i_max(e, restarts=2)
    assert value <= min(holevo(e), problem.class_entropy()) + 1e-9


def test_search_psi1_trivial_problem():
    res = search_psi1(trivial_problem(), trials=2, steps=5)
    assert res.I_max == pytest.approx(0.0, abs=1e-12)
    assert res.trials == 2


def test_search_psi1_dj_k1():
    res = search_psi1(build_dj(1), trials=1, seed=5)
    assert res.I_max >= 1.0 - 1e-6
    assert abs(np.linalg.norm(res.psi1) - 1) <= 1e-12


def test_search_psi1_bv_n2():
    # the textbook V gives H(J) = 2; the search must come within 1e-6 of it
    p = build_bv(2)
    known = i_max(run_stages(p)[StageLabel.POST_QUERY])
    res = search_psi1(p, trials=1)
    assert res.I_max >= known - 1e-6


def test_search_psi1_cap():
    with pytest.raises(ValueError):
        search_psi1(build_bv(5), trials=1)


def test_monomial_examples():
    assert monomial_check(np.eye(4))
    assert not monomial_check(hadamard(1))
    for n in (1, 2, 3):
        h = hadamard(n)
        assert np.allclose(np.abs(h), 2 ** (-n / 2))
        assert not monomial_check(h) and row_support(h) == 2**n


def test_monomial_v_permutation_oracles_zero_discord():
    from oracle_infolab.simulator import AlgorithmSpec

    perm = np.eye(4)[[2, 0, 3, 1]] * np.exp(1j * np.array([0.3, 1.1, -0.4, 2.0]))[:, None]
    assert monomial_check(perm)
    for p in (build_dj(1), build_bv(1)):
        spec = AlgorithmSpec(2, [1, 0, 0, 0], perm, np.eye(4), (0, 1))
        e = run_stages(p, spec)[StageLabel.POST_QUERY]
        assert metrics(e).D_Y <= 1e-8


def test_measurement_basis_validation():
    with pytest.raises(ValueError):
        MeasurementBasis(np.ones((2, 2)))


def test_simon_i_max_below_class_entropy():
    for n in (2, 3):
        e = post(build_simon(n))
        assert i_max(e) < build_simon(n).class_entropy() - 1e-3
