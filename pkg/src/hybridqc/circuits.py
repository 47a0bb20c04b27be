"""Parametrised circuits of Pauli-string rotations and their gradients.

Every gate is exp(-i * scale * theta[param] * P) for a bare Pauli string P.
Several gates may share a parameter (QAOA layers); the VQE ansatz uses one
gate per parameter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .statevector import PauliOperator, PauliString, StateVector, pauli_apply, rotate_vector

SHIFT = np.pi / 4


@dataclass(frozen=True)
class RotationGate:
    pauli: PauliString
    param: int
    scale: float = 1.0


@dataclass
class RotationCircuit:
    num_qubits: int
    gates: list[RotationGate] = field(default_factory=list)
    num_params: int = 0

    def __post_init__(self):
        for g in self.gates:
            if g.pauli.num_qubits != self.num_qubits:
                raise ValueError("gate acts on a different number of qubits")
            if not 0 <= g.param < self.num_params:
                raise ValueError(f"parameter index {g.param} out of range")

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.num_params,):
            raise ValueError(f"expected {self.num_params} parameters, got {theta.shape}")
        return theta

    def apply(self, vec: np.ndarray, theta, shift: tuple[int, float] | None = None) -> np.ndarray:
        """Return U(theta) vec; ``shift=(gate_index, delta)`` offsets one gate's angle."""
        theta = self._check(theta)
        out = np.array(vec, dtype=complex, copy=True)
        for k, g in enumerate(self.gates):
            angle = g.scale * theta[g.param]
            if shift is not None and shift[0] == k:
                angle += shift[1]
            if angle != 0.0:
                rotate_vector(out, self.num_qubits, g.pauli, angle)
        return out

    def state(self, initial: StateVector, theta) -> StateVector:
        return StateVector(self.num_qubits, self.apply(initial.amplitudes, theta))

    def dense_unitary(self, theta) -> np.ndarray:
        """Explicit matrix product of the gate exponentials (oracle use)."""
        from scipy.linalg import expm

        from .statevector import dense_pauli_matrix

        theta = self._check(theta)
        dim = 1 << self.num_qubits
        u = np.eye(dim, dtype=complex)
        for g in self.gates:
            p = dense_pauli_matrix(g.pauli.scaled(1.0))
            u = expm(-1j * g.scale * theta[g.param] * p) @ u
        return u


def adjoint_gradient(circuit: RotationCircuit, op: PauliOperator, initial: np.ndarray, theta):
    """Energy and exact gradient of <psi0|U^dag H U|psi0> by a reverse sweep.

    dE/dtheta_p = sum over gates using p of 2 scale Im <lambda_k| P_k |phi_k>,
    where phi_k is the state after gate k and lambda_k = U_{k+1}^dag..U_m^dag H psi.
    """
    theta = circuit._check(theta)
    n = circuit.num_qubits
    phi = circuit.apply(initial, theta)
    lam = op.matvec(phi)
    energy = float(np.vdot(phi, lam).real)
    grad = np.zeros(circuit.num_params)
    for g in reversed(circuit.gates):
        pphi = pauli_apply(phi, n, g.pauli)
        grad[g.param] += 2.0 * g.scale * float(np.vdot(lam, pphi).imag)
        angle = g.scale * theta[g.param]
        if angle != 0.0:
            rotate_vector(phi, n, g.pauli, -angle)
            rotate_vector(lam, n, g.pauli, -angle)
    return energy, grad


def parameter_shift_gradient(
    circuit: RotationCircuit,
    energy_of: Callable[[np.ndarray], float],
    initial: np.ndarray,
    theta,
) -> np.ndarray:
    """Gate-wise shift rule: dE/dphi = E(phi + pi/4) - E(phi - pi/4) for exp(-i phi P).

    ``energy_of`` maps a final state vector to its energy.  Costs two circuit
    evaluations per gate.
    """
    theta = circuit._check(theta)
    grad = np.zeros(circuit.num_params)
    for k, g in enumerate(circuit.gates):
        plus = energy_of(circuit.apply(initial, theta, shift=(k, SHIFT)))
        minus = energy_of(circuit.apply(initial, theta, shift=(k, -SHIFT)))
        grad[g.param] += g.scale * (plus - minus)
    return grad


def central_difference(f: Callable[[np.ndarray], float], x, step: float = 1e-6) -> np.ndarray:
    """Central finite differences with step ``step * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (f(x + e) - f(x - e)) / (2 * h)
    return grad
