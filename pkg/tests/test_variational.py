import numpy as np
import pytest
from scipy.linalg import expm

from hybridqc import problems as P
from hybridqc.statevector import init_basis, init_plus
from hybridqc.variational import (
    AnnealConfig,
    QaoaAngles,
    aqa_circuit,
    aqa_evolve,
    aqa_merged_angles,
    aqa_phase,
    aqa_run,
    aqa_to_qaoa_angles,
    gate_counts,
    qaoa_circuit,
    qaoa_energy,
    qaoa_optimize,
    qaoa_state,
    success_probability,
)

SMALL = P.ExactCoverInstance(np.array([[1, 0], [0, 1], [1, 1]]))


def random_model(n, rng):
    J = {(i, j): float(rng.standard_normal()) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.6}
    return P.IsingModel(n, rng.standard_normal(n), J, float(rng.standard_normal()))


def dense_driver(n):
    x = np.array([[0, 1], [1, 0]])
    total = np.zeros((1 << n, 1 << n))
    for q in range(n):
        mats = [np.eye(2)] * n
        mats[n - 1 - q] = x
        term = mats[0]
        for m in mats[1:]:
            term = np.kron(term, m)
        total -= term
    return total


def dense_qaoa(model, angles):
    n = model.num_qubits
    hc = np.diag(P.ising_energies(model))
    hd = dense_driver(n)
    psi = init_plus(n).amplitudes
    for b, g in zip(angles.betas, angles.gammas):
        psi = expm(-1j * b * hd) @ (expm(-1j * g * hc) @ psi)
    return psi


class TestAngles:
    def test_vector_round_trip(self):
        a = QaoaAngles([0.1, 0.2], [0.3, 0.4])
        b = QaoaAngles.from_vector(a.to_vector())
        np.testing.assert_array_equal(a.betas, b.betas)
        np.testing.assert_array_equal(a.gammas, b.gammas)

    def test_validation(self):
        with pytest.raises(ValueError):
            QaoaAngles([0.1], [0.2, 0.3])
        with pytest.raises(ValueError):
            QaoaAngles.from_vector([0.1, 0.2, 0.3])
        with pytest.raises(ValueError):
            AnnealConfig(0.0, 3)
        with pytest.raises(ValueError):
            AnnealConfig(0.1, 3, schedule="cubic")

    def test_random_seeded(self):
        a, b = QaoaAngles.random(4, seed=5), QaoaAngles.random(4, seed=5)
        np.testing.assert_array_equal(a.to_vector(), b.to_vector())


class TestQaoaState:
    def test_zero_angles_keep_plus(self):
        m = random_model(4, np.random.default_rng(0))
        s = qaoa_state(m, QaoaAngles(np.zeros(3), np.zeros(3)))
        np.testing.assert_allclose(s.amplitudes, init_plus(4).amplitudes, atol=1e-15)
        assert qaoa_energy(m, QaoaAngles([0.0], [0.0])) == pytest.approx(0, abs=1e-14)

    @pytest.mark.parametrize("seed", range(4))
    def test_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        m = random_model(n, rng)
        angles = QaoaAngles(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
        assert np.abs(qaoa_state(m, angles).amplitudes - dense_qaoa(m, angles)).max() < 1e-12

    def test_gate_level_circuit_matches(self):
        rng = np.random.default_rng(9)
        m = random_model(5, rng)
        angles = QaoaAngles(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2))
        circ = qaoa_circuit(m, 2)
        v = circ.apply(init_plus(5).amplitudes, angles.to_vector())
        w = qaoa_state(m, angles).amplitudes
        # equal up to a global phase (the Ising constant is not a gate)
        overlap = np.vdot(w, v)
        assert abs(abs(overlap) - 1) < 1e-10
        assert np.abs(v - overlap * w).max() < 1e-10

    def test_energy_is_weighted_classical_cost(self):
        rng = np.random.default_rng(4)
        m = random_model(5, rng)
        angles = QaoaAngles(rng.uniform(0, 1, 2), rng.uniform(0, 1, 2))
        probs = qaoa_state(m, angles).probabilities()
        brute = sum(probs[P.assignment_to_index(x)] * P.ising_energy(m, x)
                    for x in (P.index_to_assignment(i, 5) for i in range(32)))
        assert qaoa_energy(m, angles) == pytest.approx(brute, abs=1e-10)

    def test_single_qubit_optimum(self):
        m = P.IsingModel(1, np.array([1.0]))
        run = qaoa_optimize(m, QaoaAngles([0.1], [0.1]), optimizer="bfgs")
        assert run.final_energy == pytest.approx(-1, abs=1e-6)
        assert run.success_probability == pytest.approx(1, abs=1e-6)


class TestSuccessProbability:
    def test_basis_ground_state(self):
        m = P.cover_to_ising(SMALL)
        state = init_basis(3, P.assignment_to_label("110"))
        assert success_probability(state, m) == pytest.approx(1)

    def test_uniform_unique_ground(self):
        m = P.IsingModel(3, np.ones(3))
        assert success_probability(init_plus(3), m) == pytest.approx(1 / 8)

    def test_uniform_degenerate_pair(self):
        m = P.cover_to_ising(SMALL)
        assert success_probability(init_plus(3), m) == pytest.approx(2 / 8)


class TestAqa:
    def test_tiny_tau_stays_near_plus(self):
        m = random_model(3, np.random.default_rng(1))
        s = aqa_evolve(m, AnnealConfig(1e-6, 0))
        assert np.abs(s.amplitudes - init_plus(3).amplitudes).max() < 1e-5

    def test_adiabatic_single_qubit(self):
        m = P.IsingModel(1, np.array([1.0]))
        s = aqa_evolve(m, AnnealConfig(0.05, 400))
        assert s.probabilities()[1] > 0.99

    def test_adiabatic_limit_beats_coarse(self):
        m = P.IsingModel(2, np.array([0.3, -0.2]), {(0, 1): 1.0})
        fine = aqa_run(m, AnnealConfig(0.02, 2000)).success_probability
        coarse = aqa_run(m, AnnealConfig(0.8, 5)).success_probability
        assert fine > coarse

    def test_planted_four_qubit(self):
        m = P.cover_to_ising(P.random_cover_instance(4, 4, seed=0))
        run = aqa_run(m, AnnealConfig(0.8, 5))
        assert run.success_probability > 1 / 16
        assert run.evals == 1

    @pytest.mark.parametrize("tau,n", [(0.1, 0), (0.4, 3), (0.8, 5)])
    def test_merged_angles_exact_identity(self, tau, n):
        rng = np.random.default_rng(n)
        m = random_model(4, rng)
        cfg = AnnealConfig(tau, n)
        lhs = aqa_evolve(m, cfg).amplitudes
        rhs = aqa_phase(cfg, 4) * qaoa_state(m, aqa_merged_angles(cfg)).amplitudes
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_gate_level_aqa_circuit(self):
        m = random_model(4, np.random.default_rng(2))
        cfg = AnnealConfig(0.5, 3)
        circ, theta = aqa_circuit(m, cfg)
        v = circ.apply(init_plus(4).amplitudes, theta)
        w = aqa_evolve(m, cfg).amplitudes
        overlap = np.vdot(w, v)
        assert np.abs(v - overlap * w).max() < 1e-10

    def test_gate_count_parity(self):
        m = P.cover_to_ising(P.random_cover_instance(6, 5, seed=1))
        for n in range(4):
            circ, _ = aqa_circuit(m, AnnealConfig(0.3, n))
            assert gate_counts(circ) == gate_counts(qaoa_circuit(m, n + 1))

    def test_initial_angles_n0(self):
        a = aqa_to_qaoa_angles(AnnealConfig(0.3, 0))
        assert a.p == 1
        assert (a.betas[0], a.gammas[0]) == (0.3, 0.0)

    def test_initial_angles_linear_grid(self):
        a = aqa_to_qaoa_angles(AnnealConfig(0.2, 5))
        np.testing.assert_allclose(a.gammas, 0.2 * np.arange(6) / 6, atol=1e-15)
        np.testing.assert_allclose(a.betas, 0.2 * (1 - np.arange(6) / 6), atol=1e-15)
        # the merged form shares the diagonal angles
        np.testing.assert_allclose(aqa_merged_angles(AnnealConfig(0.2, 5)).gammas, a.gammas, atol=1e-15)


class TestOptimize:
    def test_budget_and_monotone(self):
        m = P.cover_to_ising(P.random_cover_instance(6, 6, seed=3))
        init = aqa_to_qaoa_angles(AnnealConfig(0.4, 2))
        for opt in ("simplex", "bfgs"):
            run = qaoa_optimize(m, init, optimizer=opt, budget=200)
            assert run.evals <= 200
            assert run.final_energy <= run.initial_energy

    def test_small_cover_regression(self):
        m = P.cover_to_ising(SMALL)
        run = qaoa_optimize(m, aqa_to_qaoa_angles(AnnealConfig(0.4, 2)), optimizer="bfgs")
        assert run.mean_cost < 0.1

    def test_planted_eight_qubit_beats_random(self):
        m = P.cover_to_ising(P.random_cover_instance(8, 8, seed=3))
        run = qaoa_optimize(m, aqa_to_qaoa_angles(AnnealConfig(0.4, 4)))
        assert run.success_probability > 2.0**-8
        assert run.evals <= 200

    @pytest.mark.parametrize("inst", [SMALL, P.random_cover_instance(4, 4, seed=0),
                                      P.random_cover_instance(8, 8, seed=3)])
    def test_optimized_beats_its_initialisation(self, inst):
        m = P.cover_to_ising(inst)
        run = qaoa_optimize(m, aqa_to_qaoa_angles(AnnealConfig(0.4, 2)))
        assert run.success_probability >= run.initial_success_probability

    def test_parameter_shift_mode(self):
        m = P.cover_to_ising(P.random_cover_instance(4, 4, seed=1))
        run = qaoa_optimize(m, QaoaAngles.random(2, seed=0), optimizer="bfgs", gradient="parameter-shift")
        assert run.evals <= 200
        assert run.final_energy <= run.initial_energy

    def test_bad_arguments(self):
        m = P.IsingModel(1, np.array([1.0]))
        with pytest.raises(ValueError):
            qaoa_optimize(m, QaoaAngles([0.1], [0.1]), optimizer="cobyla")
        with pytest.raises(ValueError):
            qaoa_optimize(m, QaoaAngles([0.1], [0.1]), budget=0)
