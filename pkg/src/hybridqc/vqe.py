"""VQE for Heisenberg models with quasi-dynamical evolution."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import RotationCircuit, RotationGate, adjoint_gradient
from .optimizers import (
    GradientFn,
    ObjectiveBudget,
    OptResult,
    minimize_quasi_newton,
    minimize_simplex,
)
from .problems import HeisenbergModel, assignment_to_index, heisenberg_terms
from .statevector import PauliOperator, PauliString, check_memory

DEFAULT_VQE_BUDGET = 10_000
DEFAULT_THRESHOLD = 1e-4
DEFAULT_MAX_ROUNDS = 20
ADJOINT_COST = 2


Ansatz = RotationCircuit


def _pair_generator(n: int, p: int, q: int) -> PauliString:
    """sigma_p^y sigma_q^x, times sigma_N^z unless p or q is the last spin (1-based labels)."""
    factors = {p - 1: "Y", q - 1: "X"}
    if p != n and q != n:
        factors[n - 1] = "Z"
    return PauliString(n, factors)


def build_ansatz(n: int) -> Ansatz:
    """Two bracketed pair products, N(N-1) parameters.

    Gates are listed in application order: the right bracket (U_kl) acts
    first, then the left bracket (U_lk); within each bracket l runs 1..N-1
    and k runs l+1..N, the reverse of the written descending products.
    """
    if n < 2:
        raise ValueError("ansatz needs at least 2 qubits")
    order = []
    for l in range(1, n):
        for k in range(l + 1, n + 1):
            order.append((k, l))
    for l in range(1, n):
        for k in range(l + 1, n + 1):
            order.append((l, k))
    gates = [RotationGate(_pair_generator(n, p, q), idx) for idx, (p, q) in enumerate(order)]
    return RotationCircuit(n, gates, len(gates))


@dataclass
class QuasiConfig:
    improvement_threshold: float = DEFAULT_THRESHOLD
    max_rounds: int = DEFAULT_MAX_ROUNDS

    def __post_init__(self):
        if self.improvement_threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass
class OptimizerConfig:
    method: str = "bfgs"
    max_evals: int = DEFAULT_VQE_BUDGET
    ftol: float = 1e-10
    gtol: float = 1e-6


@dataclass
class VqeResult:
    final_energy: float
    energy_fidelity: float | None
    rounds: int
    per_round_energies: list[float]
    params_per_round: list[np.ndarray]
    evals: int = 0
    state: np.ndarray | None = field(default=None, repr=False)
    converged: bool = True


def _operator(model: HeisenbergModel) -> PauliOperator:
    return PauliOperator(heisenberg_terms(model), model.num_spins)


def _initial_vector(n: int, initial) -> np.ndarray:
    if isinstance(initial, str):
        if len(initial) != n:
            raise ValueError(f"initial bitstring must have length {n}")
        check_memory(n)
        vec = np.zeros(1 << n, dtype=complex)
        vec[assignment_to_index(initial)] = 1.0
        return vec
    vec = np.asarray(initial, dtype=complex)
    if vec.shape != (1 << n,):
        raise ValueError("initial state has the wrong dimension")
    return vec


def vqe_energy(model: HeisenbergModel, ansatz: Ansatz, theta, initial_bits) -> float:
    """<psi0| U(theta)^dag H U(theta) |psi0> with psi0 a basis assignment or a vector."""
    if ansatz.num_qubits != model.num_spins:
        raise ValueError("ansatz and model sizes differ")
    op = _operator(model)
    return op.expectation(ansatz.apply(_initial_vector(model.num_spins, initial_bits), theta))


def energy_fidelity(e_var: float, e0: float, atol: float = 1e-9) -> float:
    """Ratio of the variational energy to the ground energy."""
    if e0 == 0:
        raise ValueError("energy fidelity undefined for zero ground energy")
    if e0 < 0 and e_var < e0 - atol:
        raise ValueError(f"variational energy {e_var} lies below the ground energy {e0}")
    return e_var / e0


def _optimize(model, ansatz, op, psi0, theta0, optimizer: OptimizerConfig) -> OptResult:
    def f(theta):
        return op.expectation(ansatz.apply(psi0, theta))

    budget = ObjectiveBudget(optimizer.max_evals)
    if optimizer.method == "simplex":
        return minimize_simplex(f, theta0, budget, ftol=optimizer.ftol)
    if optimizer.method == "bfgs":
        grad = GradientFn(lambda th: adjoint_gradient(ansatz, op, psi0, th)[1], ADJOINT_COST)
        return minimize_quasi_newton(f, theta0, budget, gtol=optimizer.gtol, gradient=grad)
    raise ValueError(f"unknown optimizer {optimizer.method!r}")


def vqe_optimize(model, ansatz, theta0, initial_bits, optimizer: OptimizerConfig | None = None,
                 e0: float | None = None) -> VqeResult:
    """One VQE round from ``theta0``; ``e0`` enables the fidelity field."""
    optimizer = optimizer or OptimizerConfig()
    op = _operator(model)
    psi0 = _initial_vector(model.num_spins, initial_bits)
    res = _optimize(model, ansatz, op, psi0, np.asarray(theta0, dtype=float), optimizer)
    state = ansatz.apply(psi0, res.best_params)
    fid = None if e0 is None else energy_fidelity(res.best_value, e0)
    return VqeResult(res.best_value, fid, 1, [res.best_value], [res.best_params],
                     res.evals, state, res.converged)


def random_restarts(model, ansatz, initial_bits, restarts: int, seed: int | None,
                    optimizer: OptimizerConfig | None = None, e0: float | None = None) -> VqeResult:
    """Best of ``restarts`` rounds with theta drawn uniformly from [-pi, pi)."""
    rng = np.random.default_rng(seed)
    best = None
    evals = 0
    for _ in range(restarts):
        theta0 = rng.uniform(-np.pi, np.pi, ansatz.num_params)
        res = vqe_optimize(model, ansatz, theta0, initial_bits, optimizer, e0)
        evals += res.evals
        if best is None or res.final_energy < best.final_energy:
            best = res
    best.evals = evals
    return best


def quasi_dynamics(model, ansatz, initial_bits, cfg: QuasiConfig | None = None,
                   optimizer: OptimizerConfig | None = None, e0: float | None = None,
                   ansatz_for_round=None) -> VqeResult:
    """Repeated VQE rounds, each starting at theta = 0 from the previous optimised state.

    Stops once a round lowers the energy by less than the threshold or after
    ``max_rounds``.  ``ansatz_for_round(r)`` may supply a different circuit per round.
    """
    cfg = cfg or QuasiConfig()
    optimizer = optimizer or OptimizerConfig()
    op = _operator(model)
    psi = _initial_vector(model.num_spins, initial_bits)
    energies: list[float] = []
    params: list[np.ndarray] = []
    evals = 0
    converged = True
    previous = op.expectation(psi)
    for r in range(1, cfg.max_rounds + 1):
        circ = ansatz if ansatz_for_round is None else ansatz_for_round(r)
        res = _optimize(model, circ, op, psi, np.zeros(circ.num_params), optimizer)
        evals += res.evals
        converged = converged and res.converged
        if res.best_value > previous:
            # theta = 0 reproduces the previous state, so this cannot happen
            # unless the objective misbehaves; keep the old state
            break
        psi = circ.apply(psi, res.best_params)
        energies.append(res.best_value)
        params.append(res.best_params)
        improvement = previous - res.best_value
        previous = res.best_value
        if improvement < cfg.improvement_threshold:
            break
    final = energies[-1]
    fid = None if e0 is None else energy_fidelity(final, e0)
    return VqeResult(final, fid, len(energies), energies, params, evals, psi, converged)
