import numpy as np
import pytest

from hybridqc.circuits import (
    RotationCircuit,
    RotationGate,
    adjoint_gradient,
    central_difference,
    parameter_shift_gradient,
)
from hybridqc.problems import heisenberg_ring, heisenberg_terms
from hybridqc.statevector import PauliOperator, PauliString


def random_circuit(n, gates, params, rng):
    out = []
    for _ in range(gates):
        letters = rng.choice(list("IXYZ"), n)
        if set(letters) == {"I"}:
            letters[0] = "Y"
        p = PauliString(n, {q: c for q, c in enumerate(letters) if c != "I"})
        out.append(RotationGate(p, int(rng.integers(params)), float(rng.choice([1.0, -0.5, 2.0]))))
    return RotationCircuit(n, out, params)


def random_vector(n, rng):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_apply_matches_dense_unitary(n):
    rng = np.random.default_rng(n)
    circ = random_circuit(n, 15, 4, rng)
    theta = rng.uniform(-np.pi, np.pi, 4)
    v = random_vector(n, rng)
    assert np.abs(circ.apply(v, theta) - circ.dense_unitary(theta) @ v).max() < 1e-10


def test_apply_does_not_mutate_input():
    rng = np.random.default_rng(0)
    circ = random_circuit(3, 5, 2, rng)
    v = random_vector(3, rng)
    ref = v.copy()
    circ.apply(v, [0.3, 0.4])
    np.testing.assert_array_equal(v, ref)


def test_parameter_count_checked():
    circ = random_circuit(2, 3, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        circ.apply(np.ones(4) / 2, [0.1])
    with pytest.raises(ValueError):
        RotationCircuit(2, [RotationGate(PauliString.parse(2, "X0"), 3)], 2)


@pytest.mark.parametrize("seed", range(5))
def test_adjoint_and_shift_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n = 4
    op = PauliOperator(heisenberg_terms(heisenberg_ring(n)), n)
    circ = random_circuit(n, 12, 6, rng)
    psi0 = random_vector(n, rng)
    theta = rng.uniform(-1, 1, 6)

    def energy(t):
        return op.expectation(circ.apply(psi0, t))

    fd = central_difference(energy, theta)
    e, adj = adjoint_gradient(circ, op, psi0, theta)
    ps = parameter_shift_gradient(circ, op.expectation, psi0, theta)
    assert e == pytest.approx(energy(theta), abs=1e-12)
    assert np.abs(adj - fd).max() < 1e-6
    assert np.abs(ps - fd).max() < 1e-6
    assert np.abs(adj - ps).max() < 1e-10
