import numpy as np
import pytest
from scipy.sparse.linalg import eigsh

from hybridqc.eigensolver import ConvergenceError, ground_dense, ground_lanczos, sparse_matrix
from hybridqc.problems import heisenberg_ring, heisenberg_terms
from hybridqc.statevector import PauliOperator, PauliString


def ring_operator(n):
    return PauliOperator(heisenberg_terms(heisenberg_ring(n)), n)


def random_hamiltonian(n, rng, terms=20):
    out = []
    for _ in range(terms):
        letters = rng.choice(list("IXYZ"), n)
        if set(letters) == {"I"}:
            letters[rng.integers(n)] = "X"
        out.append(PauliString(n, {q: c for q, c in enumerate(letters) if c != "I"},
                               float(rng.standard_normal())))
    return out


def test_single_z():
    assert ground_dense([PauliString.parse(1, "Z0")], 1).e0 == pytest.approx(-1)
    assert ground_lanczos(PauliOperator([PauliString.parse(1, "Z0")], 1), 1).e0 == pytest.approx(-1)


def test_two_spin_singlet():
    res = ground_lanczos(ring_operator(2), 2)
    assert res.e0 == pytest.approx(-3, abs=1e-10)
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert abs(np.vdot(singlet, res.vector.amplitudes)) == pytest.approx(1, abs=1e-8)


def test_sparse_matrix_matches_operator():
    rng = np.random.default_rng(0)
    terms = random_hamiltonian(5, rng)
    v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    np.testing.assert_allclose(sparse_matrix(terms, 5) @ v, PauliOperator(terms, 5).matvec(v), atol=1e-12)


@pytest.mark.parametrize("seed", range(50))
def test_random_hamiltonians_match_dense(seed):
    rng = np.random.default_rng(1000 + seed)
    terms = random_hamiltonian(8, rng)
    dense = ground_dense(terms, 8).e0
    lan = ground_lanczos(PauliOperator(terms, 8), 8, seed=seed)
    assert lan.e0 == pytest.approx(dense, abs=1e-8)
    assert lan.e0 >= dense - 1e-8


@pytest.mark.parametrize("n,e0", [(11, -18.875745452), (12, -21.54956364)])
def test_frozen_ring_energies(n, e0):
    res = ground_lanczos(ring_operator(n), n)
    assert res.e0 == pytest.approx(e0, abs=1e-6)
    assert res.residual < 1e-8


def test_against_scipy_eigsh():
    n = 10
    res = ground_lanczos(ring_operator(n), n)
    ref = eigsh(sparse_matrix(heisenberg_terms(heisenberg_ring(n)), n), k=1, which="SA")[0][0]
    assert res.e0 == pytest.approx(ref, abs=1e-9)


def test_residual_definition():
    n = 8
    op = ring_operator(n)
    res = ground_lanczos(op, n)
    v = res.vector.amplitudes
    r = np.linalg.norm(op.matvec(v) - res.e0 * v) / np.linalg.norm(v)
    assert r < 1e-8
    assert r == pytest.approx(res.residual, abs=1e-10)


def test_seed_determinism():
    a = ground_lanczos(ring_operator(9), 9, seed=3)
    b = ground_lanczos(ring_operator(9), 9, seed=3)
    assert a.e0 == b.e0 and a.iterations == b.iterations


def test_accepts_plain_callable():
    op = ring_operator(6)
    res = ground_lanczos(op.matvec, 6)
    assert res.e0 == pytest.approx(ground_dense(heisenberg_terms(heisenberg_ring(6)), 6).e0, abs=1e-9)


def test_small_restart_basis():
    n = 10
    res = ground_lanczos(ring_operator(n), n, max_basis=8, max_iter=2000)
    assert res.e0 == pytest.approx(ground_lanczos(ring_operator(n), n).e0, abs=1e-9)


def test_non_convergence_carries_best():
    with pytest.raises(ConvergenceError) as err:
        ground_lanczos(ring_operator(10), 10, max_iter=3)
    assert err.value.result.iterations == 3
    assert np.isfinite(err.value.result.e0)


def test_dense_n11():
    res = ground_dense(heisenberg_terms(heisenberg_ring(11)), 11)
    assert res.e0 == pytest.approx(-18.875745452, abs=1e-8)
    assert res.residual < 1e-8


def test_dense_cap():
    with pytest.raises(ValueError):
        ground_dense(heisenberg_terms(heisenberg_ring(13)), 13)
