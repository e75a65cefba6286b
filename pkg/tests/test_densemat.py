import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from oracle_infolab import densemat as dm
from oracle_infolab.simulator import run_stages
from oracle_infolab.problems import build_bv, build_dj, build_simon_explicit
from oracle_infolab.ensembles import mix

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def test_tensor_identity():
    assert np.array_equal(dm.tensor(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_z_z_diagonal():
    assert np.array_equal(np.diagonal(dm.tensor(Z, Z)).real, [1, -1, -1, 1])


def test_hadamard_pair_on_zero_state():
    # H|0> = (1, 1)/sqrt2 by hand, so H⊗H|00> has every amplitude 1/2
    out = dm.tensor(dm.hadamard(), dm.hadamard()) @ dm.basis_state(0, 4)
    assert np.allclose(out, 0.5)


def test_tensor_cap(monkeypatch):
    monkeypatch.setenv(dm.CAP_ENV_VAR, "8")
    with pytest.raises(dm.DimensionCapError):
        dm.tensor(np.eye(4), np.eye(4))
    assert dm.tensor(np.eye(2), np.eye(4)).shape == (8, 8)


@given(st.integers(0, 2**31 - 1))
def test_tensor_associative_on_integers(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.integers(-3, 4, size=(2, 2)) for _ in range(3))
    assert np.array_equal(dm.tensor(dm.tensor(a, b), c), dm.tensor(a, dm.tensor(b, c)))


def test_partial_trace_product_state():
    rng = np.random.default_rng(1)
    rho = dm.random_density_matrix(2, rng)
    sigma = dm.random_density_matrix(4, rng)
    prod = np.kron(rho, sigma)
    assert np.allclose(dm.partial_trace(prod, [2, 4], [0]), rho, atol=1e-12)
    assert np.allclose(dm.partial_trace(prod, [2, 4], [1]), sigma, atol=1e-12)


def test_partial_trace_bell_state():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(dm.partial_trace(np.outer(phi, phi), [2, 2], [1]), np.eye(2) / 2)


def test_partial_trace_matches_loops():
    rng = np.random.default_rng(2)
    rho = dm.random_density_matrix(12, rng)
    for keep in ([0], [1], [2], [0, 2], [1, 2]):
        ref = oracles.partial_trace_loops(rho, [2, 3, 2], keep)
        assert np.allclose(dm.partial_trace(rho, [2, 3, 2], keep), ref, atol=1e-12)


def test_partial_trace_errors():
    with pytest.raises(ValueError):
        dm.partial_trace(np.eye(4) / 4, [2, 2], [])
    with pytest.raises(ValueError):
        dm.partial_trace(np.eye(4) / 4, [2, 2], [2])
    with pytest.raises(ValueError):
        dm.partial_trace(np.eye(4) / 4, [2, 3], [0])


def test_simon_post_query_block_form():
    # one concrete n=2 Simon function, brute-forced: entries 1/4 where g - g' in H_s, else 0
    problem = build_simon_explicit(2)
    post = run_stages(problem)["post_query"]
    for label, sigma in zip(post.labels, post.states):
        s = int(label, 2)
        expected = np.array([[0.25 if (g ^ h) in (0, s) else 0.0 for h in range(4)] for g in range(4)])
        assert np.allclose(sigma, expected, atol=1e-12)


@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(1, 3))
def test_partial_trace_preserves_trace(seed, a, b):
    rng = np.random.default_rng(seed)
    rho = dm.random_density_matrix(2**a * 3**b, rng)
    assert abs(np.trace(dm.partial_trace(rho, [2**a, 3**b], [0])) - 1) <= 1e-12


def test_reduce_pure_matches_partial_trace():
    rng = np.random.default_rng(3)
    psi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    psi /= np.linalg.norm(psi)
    for keep in ([0], [1, 3], [0, 1, 2]):
        ref = dm.partial_trace(dm.projector(psi), [2] * 4, keep)
        assert np.allclose(dm.reduce_pure(psi, [2] * 4, keep), ref, atol=1e-12)
        assert np.allclose(dm.reduce_pure_batch(psi[None, :], [2] * 4, keep), ref, atol=1e-12)


def test_hermitian_eig_examples():
    assert np.allclose(dm.hermitian_eig(np.diag([0.25, 0.75])).eigenvalues, [0.25, 0.75])
    assert np.allclose(dm.hermitian_eig(X).eigenvalues, [-1, 1])


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        dm.hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_hermitian_eig_dj_final_entropy():
    final = run_stages(build_dj(2))["final"]
    lam = dm.hermitian_eig(mix(final)).eigenvalues
    assert abs(dm.entropy_of_spectrum(lam) - 1.7925) <= 5e-4


@given(st.integers(0, 2**31 - 1), st.integers(1, 16))
def test_hermitian_eig_invariants(seed, dim):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a = g + g.conj().T
    dec = dm.hermitian_eig(a)
    q, lam = dec.eigenvectors, dec.eigenvalues
    norm = np.linalg.norm(a, 2)
    assert np.all(np.diff(lam) >= 0)
    assert np.max(np.abs(q.conj().T @ q - np.eye(dim))) <= 1e-10
    assert np.max(np.linalg.norm(a @ q - q * lam, axis=0)) <= 1e-10 * norm
    assert np.max(np.abs(dec.reconstruct() - a)) <= 1e-9 * norm
    for col in range(dim):
        first = q[np.flatnonzero(np.abs(q[:, col]) > 1e-12)[0], col]
        assert abs(first.imag) <= 1e-12 and first.real > 0


def test_hermitian_eig_deterministic():
    rng = np.random.default_rng(4)
    a = dm.random_density_matrix(8, rng)
    one, two = dm.hermitian_eig(a), dm.hermitian_eig(a.copy())
    assert np.array_equal(one.eigenvectors, two.eigenvectors)


def test_entropy_examples():
    rng = np.random.default_rng(5)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    assert dm.von_neumann_entropy(dm.projector(psi / np.linalg.norm(psi))) == pytest.approx(0, abs=1e-9)
    for n in range(1, 6):
        assert dm.von_neumann_entropy(np.eye(2**n) / 2**n) == pytest.approx(n, abs=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_entropy_bv_post_query(n):
    post = run_stages(build_bv(n))["post_query"]
    assert dm.von_neumann_entropy(mix(post)) == pytest.approx(n, abs=1e-9)


def test_entropy_errors():
    with pytest.raises(ValueError):
        dm.von_neumann_entropy(np.eye(2))
    with pytest.raises(ValueError):
        dm.von_neumann_entropy(np.diag([1.5, -0.5]))


@given(st.integers(0, 2**31 - 1), st.integers(1, 16))
def test_entropy_unitary_invariance(seed, dim):
    rng = np.random.default_rng(seed)
    rho = dm.random_density_matrix(dim, rng, rank=int(rng.integers(1, dim + 1)))
    u = dm.random_unitary(dim, rng)
    assert abs(dm.von_neumann_entropy(u @ rho @ u.conj().T) - dm.von_neumann_entropy(rho)) <= 1e-9
    assert abs(dm.von_neumann_entropy(rho) - oracles.entropy_bits(rho)) <= 1e-9


def test_shannon_zero_log_zero():
    assert dm.shannon_entropy([0.5, 0.5, 0.0]) == 1.0
    assert dm.shannon_entropy([1.0, 0.0]) == 0.0
