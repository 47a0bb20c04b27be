"""QAOA and approximate quantum annealing (AQA) drivers.

Conventions: H_D = -sum_i X_i, so exp(-i beta H_D) is R^x(-2 beta) on every
qubit and |+>^N is the ground state of H_D.  Angle vectors passed to the
optimizer are laid out as ``[beta_1..beta_p, gamma_1..gamma_p]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuits import RotationCircuit, RotationGate, parameter_shift_gradient
from .optimizers import (
    GradientFn,
    ObjectiveBudget,
    OptResult,
    minimize_quasi_newton,
    minimize_simplex,
)
from .problems import IsingModel, ground_indices, ising_energies
from .statevector import (
    PauliString,
    StateVector,
    apply_diagonal,
    apply_single_qubit,
    check_memory,
    init_plus,
    rx,
)

DEFAULT_QAOA_BUDGET = 200


def linear_schedule(t: float, t_anneal: float) -> tuple[float, float]:
    s = t / t_anneal
    return 1.0 - s, s


SCHEDULES: dict[str, Callable[[float, float], tuple[float, float]]] = {
    "linear": linear_schedule,
}


@dataclass
class QaoaAngles:
    betas: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        self.betas = np.atleast_1d(np.asarray(self.betas, dtype=float))
        self.gammas = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        if self.betas.shape != self.gammas.shape or self.betas.ndim != 1 or self.betas.size < 1:
            raise ValueError("betas and gammas must be nonempty vectors of equal length")

    @property
    def p(self) -> int:
        return self.betas.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.betas, self.gammas])

    @classmethod
    def from_vector(cls, x) -> "QaoaAngles":
        x = np.asarray(x, dtype=float)
        if x.size % 2:
            raise ValueError("angle vector must have even length")
        p = x.size // 2
        return cls(x[:p], x[p:])

    @classmethod
    def random(cls, p: int, seed: int | None = None) -> "QaoaAngles":
        rng = np.random.default_rng(seed)
        return cls(rng.uniform(0, np.pi / 2, p), rng.uniform(0, np.pi / 2, p))


@dataclass
class AnnealConfig:
    tau: float
    n: int
    schedule: str = "linear"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}; choose from {sorted(SCHEDULES)}")

    @property
    def t_anneal(self) -> float:
        return (self.n + 1) * self.tau

    def coefficients(self, l: int) -> tuple[float, float]:
        """(A(l tau), B(l tau))."""
        return SCHEDULES[self.schedule](l * self.tau, self.t_anneal)


@dataclass
class VariationalRun:
    final_energy: float
    success_probability: float
    angles: QaoaAngles | None
    evals: int
    history: list[tuple[int, float]] = field(default_factory=list)
    offset: float = 0.0
    initial_energy: float | None = None
    initial_success_probability: float | None = None
    converged: bool = True

    @property
    def mean_cost(self) -> float:
        return self.final_energy + self.offset


def _mix(state: StateVector, beta: float) -> None:
    gate = rx(-2.0 * beta)
    for q in range(state.num_qubits):
        apply_single_qubit(state, q, gate)


def qaoa_state(model: IsingModel, angles: QaoaAngles, energies: np.ndarray | None = None) -> StateVector:
    """|beta, gamma> with the k = 1 layer acting first.

    Each layer applies exp(-i gamma_k H_C) as a diagonal phase, then the
    mixer exp(-i beta_k H_D).
    """
    check_memory(model.num_qubits)
    if energies is None:
        energies = ising_energies(model)
    state = init_plus(model.num_qubits)
    for beta, gamma in zip(angles.betas, angles.gammas):
        apply_diagonal(state, energies, gamma)
        _mix(state, beta)
    return state


def qaoa_energy(model: IsingModel, angles: QaoaAngles, energies: np.ndarray | None = None) -> float:
    """<H_C> in the QAOA state, offset excluded; add ``model.offset`` for the mean cost."""
    if energies is None:
        energies = ising_energies(model)
    state = qaoa_state(model, angles, energies)
    return float(state.probabilities() @ energies)


def qaoa_circuit(model: IsingModel, p: int) -> RotationCircuit:
    """Gate-level form of the QAOA circuit (R^z, ZZ and R^x rotations) for |+>^N input."""
    n = model.num_qubits
    gates = []
    for k in range(p):
        for i, h in enumerate(model.h):
            if h:
                gates.append(RotationGate(PauliString(n, {i: "Z"}), p + k, float(h)))
        for (i, j), v in sorted(model.J.items()):
            if v:
                gates.append(RotationGate(PauliString(n, {i: "Z", j: "Z"}), p + k, v))
        for i in range(n):
            gates.append(RotationGate(PauliString(n, {i: "X"}), k, -1.0))
    return RotationCircuit(n, gates, 2 * p)


def gate_counts(circuit: RotationCircuit) -> tuple[int, int]:
    """(single-qubit, multi-qubit) gate counts."""
    single = sum(len(g.pauli.factors) == 1 for g in circuit.gates)
    return single, len(circuit.gates) - single


def success_probability(state: StateVector, model: IsingModel, ground: np.ndarray | None = None) -> float:
    """Probability mass on all ground-state bitstrings (brute-force ground set)."""
    if ground is None:
        ground = ground_indices(model)
    return float(min(1.0, np.sum(np.abs(state.amplitudes[ground]) ** 2)))


def aqa_evolve(model: IsingModel, cfg: AnnealConfig, energies: np.ndarray | None = None) -> StateVector:
    """Second-order product-formula anneal from |+>^N with n + 1 steps of size tau."""
    check_memory(model.num_qubits)
    if energies is None:
        energies = ising_energies(model)
    state = init_plus(model.num_qubits)
    for l in range(cfg.n + 1):
        a, b = cfg.coefficients(l)
        half = 0.5 * cfg.tau * a
        _mix(state, half)
        apply_diagonal(state, energies, cfg.tau * b)
        _mix(state, half)
    return state


def aqa_to_qaoa_angles(cfg: AnnealConfig) -> QaoaAngles:
    """p = n + 1 with beta_k = tau A((k-1) tau) and gamma_k = tau B((k-1) tau)."""
    coeffs = [cfg.coefficients(l) for l in range(cfg.n + 1)]
    return QaoaAngles([cfg.tau * a for a, _ in coeffs], [cfg.tau * b for _, b in coeffs])


def aqa_merged_angles(cfg: AnnealConfig) -> QaoaAngles:
    """QAOA angles reproducing aqa_evolve exactly up to a global phase.

    Adjacent driver half-steps commute and merge into one mixer of angle
    tau (A(l tau) + A((l+1) tau)) / 2; the last one keeps only its half.  The
    leading half-step acts on the H_D eigenstate |+>^N and only contributes
    :func:`aqa_phase`: aqa_evolve = aqa_phase * qaoa_state(angles).
    """
    coeffs = [cfg.coefficients(l) for l in range(cfg.n + 1)]
    a = [c[0] for c in coeffs]
    betas = [0.5 * cfg.tau * (a[l] + a[l + 1]) for l in range(cfg.n)] + [0.5 * cfg.tau * a[-1]]
    gammas = [cfg.tau * b for _, b in coeffs]
    return QaoaAngles(betas, gammas)


def aqa_circuit(model: IsingModel, cfg: AnnealConfig) -> tuple[RotationCircuit, np.ndarray]:
    """Gate-level AQA in merged form: a p = n + 1 QAOA circuit and its fixed angles."""
    return qaoa_circuit(model, cfg.n + 1), aqa_merged_angles(cfg).to_vector()


def aqa_phase(cfg: AnnealConfig, num_qubits: int) -> complex:
    """Phase picked up by the leading half-step on |+>^N (H_D eigenvalue -N)."""
    a0 = cfg.coefficients(0)[0]
    return complex(np.exp(0.5j * cfg.tau * a0 * num_qubits))


def _qaoa_objective(model: IsingModel, energies: np.ndarray):
    def f(x):
        return qaoa_energy(model, QaoaAngles.from_vector(x), energies)
    return f


def qaoa_parameter_shift(model: IsingModel, angles: QaoaAngles, energies: np.ndarray | None = None) -> np.ndarray:
    """Gradient of the QAOA energy by the gate-wise shift rule, in to_vector() layout."""
    if energies is None:
        energies = ising_energies(model)
    circ = qaoa_circuit(model, angles.p)
    plus = init_plus(model.num_qubits).amplitudes
    return parameter_shift_gradient(circ, lambda v: float((np.abs(v) ** 2) @ energies), plus, angles.to_vector())


def qaoa_optimize(
    model: IsingModel,
    init: QaoaAngles,
    optimizer: str = "simplex",
    budget: int = DEFAULT_QAOA_BUDGET,
    ftol: float = 1e-8,
    gtol: float = 1e-6,
    gradient: str = "finite-difference",
) -> VariationalRun:
    """Minimise E_p(beta, gamma) under an evaluation budget; P_success is only reported."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    energies = ising_energies(model)
    ground = ground_indices(model)
    f = _qaoa_objective(model, energies)
    x0 = init.to_vector()
    b = ObjectiveBudget(budget)
    if optimizer == "simplex":
        res = minimize_simplex(f, x0, b, ftol=ftol)
    elif optimizer == "bfgs":
        grad = None
        if gradient == "parameter-shift":
            circ = qaoa_circuit(model, init.p)
            grad = GradientFn(
                lambda x: qaoa_parameter_shift(model, QaoaAngles.from_vector(x), energies),
                2 * len(circ.gates),
            )
        elif gradient != "finite-difference":
            raise ValueError(f"unknown gradient mode {gradient!r}")
        res = minimize_quasi_newton(f, x0, b, gtol=gtol, gradient=grad)
    else:
        raise ValueError(f"unknown optimizer {optimizer!r}")
    return _run_from(model, res, energies, ground, init)


def _run_from(model, res: OptResult, energies, ground, init: QaoaAngles) -> VariationalRun:
    angles = QaoaAngles.from_vector(res.best_params)
    state = qaoa_state(model, angles, energies)
    init_state = qaoa_state(model, init, energies)
    return VariationalRun(
        final_energy=res.best_value,
        success_probability=success_probability(state, model, ground),
        angles=angles,
        evals=res.evals,
        history=res.history,
        offset=model.offset,
        initial_energy=float(init_state.probabilities() @ energies),
        initial_success_probability=success_probability(init_state, model, ground),
        converged=res.converged,
    )


def aqa_run(model: IsingModel, cfg: AnnealConfig) -> VariationalRun:
    """Single AQA evolution with energy and success probability (one circuit evaluation)."""
    energies = ising_energies(model)
    state = aqa_evolve(model, cfg, energies)
    e = float(state.probabilities() @ energies)
    return VariationalRun(e, success_probability(state, model), None, 1, [(1, e)], model.offset)
