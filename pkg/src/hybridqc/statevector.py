"""Dense state-vector representation and matrix-free gate kernels.

Amplitude index ``q`` encodes the computational basis state with bit ``j``
of ``q`` holding qubit ``j`` (little-endian).  Ket labels such as ``"10"``
are written most-significant qubit first, i.e. ``q_{N-1} ... q_1 q_0``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

DEFAULT_MAX_QUBITS = 30
MAX_QUBITS_ENV = "HYBRIDQC_MAX_QUBITS"
BYTES_PER_AMPLITUDE = 16

_SQRT1_2 = 1.0 / np.sqrt(2.0)

H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

PAULI_MATRICES = {"X": X, "Y": Y, "Z": Z}


class ResourceLimitError(RuntimeError):
    """Raised when a state would exceed the configured qubit/memory cap."""


def rx(phi: float) -> np.ndarray:
    """R^x(phi) = exp(-i phi sigma^x / 2)."""
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(phi: float) -> np.ndarray:
    """R^z(phi) = exp(-i phi sigma^z / 2)."""
    return np.array([[np.exp(-0.5j * phi), 0], [0, np.exp(0.5j * phi)]], dtype=complex)


def check_unitary(gate: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    gate = np.asarray(gate, dtype=complex)
    if gate.ndim != 2 or gate.shape[0] != gate.shape[1]:
        raise ValueError(f"gate must be a square matrix, got shape {gate.shape}")
    if not np.allclose(gate @ gate.conj().T, np.eye(gate.shape[0]), atol=atol, rtol=0):
        raise ValueError("gate is not unitary")
    return gate


def memory_estimate(num_qubits: int) -> int:
    """Bytes needed for a double-precision complex state of ``num_qubits``."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    return BYTES_PER_AMPLITUDE * (1 << num_qubits)


def max_qubits() -> int:
    value = os.environ.get(MAX_QUBITS_ENV)
    return int(value) if value else DEFAULT_MAX_QUBITS


def check_memory(num_qubits: int, limit: int | None = None) -> None:
    """Pre-flight check before allocating a state; raises ResourceLimitError."""
    limit = max_qubits() if limit is None else limit
    if num_qubits > limit:
        raise ResourceLimitError(
            f"{num_qubits} qubits need {memory_estimate(num_qubits)} bytes; "
            f"cap is {limit} qubits ({memory_estimate(limit)} bytes), "
            f"override with {MAX_QUBITS_ENV}"
        )


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise ValueError(
                f"expected {1 << self.num_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def dump_text(self) -> str:
        """One line per amplitude: ``index bitstring re im``."""
        lines = []
        for q, a in enumerate(self.amplitudes):
            lines.append(
                f"{q} {index_to_label(q, self.num_qubits)} {a.real:.17g} {a.imag:.17g}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def load_text(cls, text: str) -> "StateVector":
        rows = [line.split() for line in text.splitlines() if line.strip()]
        n = len(rows[0][1])
        amps = np.zeros(1 << n, dtype=complex)
        for idx, _, re, im in rows:
            amps[int(idx)] = complex(float(re), float(im))
        return cls(n, amps)


def label_to_index(label: str) -> int:
    """Ket label ``q_{N-1}...q_0`` to amplitude index."""
    if not label or set(label) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {label!r}")
    return int(label, 2)


def index_to_label(index: int, num_qubits: int) -> str:
    return format(index, f"0{num_qubits}b")


def init_basis(num_qubits: int, bits: str) -> StateVector:
    """Basis state for a ket label (most-significant qubit first)."""
    if len(bits) != num_qubits:
        raise ValueError(f"bitstring length {len(bits)} != num_qubits {num_qubits}")
    check_memory(num_qubits)
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[label_to_index(bits)] = 1.0
    return StateVector(num_qubits, amps)


def init_plus(num_qubits: int) -> StateVector:
    check_memory(num_qubits)
    dim = 1 << num_qubits
    return StateVector(num_qubits, np.full(dim, dim**-0.5, dtype=np.complex128))


def _check_qubit(j: int, n: int) -> None:
    if not 0 <= j < n:
        raise IndexError(f"qubit {j} out of range for {n} qubits")


def apply_single_qubit(state: StateVector, j: int, gate: np.ndarray) -> None:
    """In-place two-component update on every amplitude pair differing in bit j."""
    _check_qubit(j, state.num_qubits)
    u = check_unitary(gate, atol=1e-10)
    if u.shape != (2, 2):
        raise ValueError(f"single-qubit gate must be 2x2, got {u.shape}")
    v = state.amplitudes.reshape(-1, 2, 1 << j)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    v[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def apply_two_qubit(state: StateVector, j: int, k: int, gate: np.ndarray) -> None:
    """In-place four-component update; ``gate`` is indexed by (q_j, q_k) as 2*q_j + q_k."""
    n = state.num_qubits
    _check_qubit(j, n)
    _check_qubit(k, n)
    if j == k:
        raise ValueError("two-qubit gate needs distinct qubits")
    u = check_unitary(gate, atol=1e-10)
    if u.shape != (4, 4):
        raise ValueError(f"two-qubit gate must be 4x4, got {u.shape}")
    u = u.reshape(2, 2, 2, 2)
    t = state.amplitudes.reshape([2] * n)
    aj, ak = n - 1 - j, n - 1 - k
    moved = np.moveaxis(t, (aj, ak), (0, 1))
    new = np.tensordot(u, moved, axes=([2, 3], [0, 1]))
    moved[...] = new


@dataclass(frozen=True)
class PauliString:
    """Tensor product of X/Y/Z factors with a real prefactor.

    ``factors`` is stored as a sorted tuple of ``(qubit, letter)`` pairs.
    """

    num_qubits: int
    factors: tuple[tuple[int, str], ...]
    prefactor: float = 1.0

    def __post_init__(self):
        if isinstance(self.factors, Mapping):
            object.__setattr__(self, "factors", tuple(sorted(self.factors.items())))
        else:
            object.__setattr__(self, "factors", tuple(sorted(self.factors)))
        if not self.factors:
            raise ValueError("PauliString needs at least one factor")
        seen = set()
        for q, op in self.factors:
            if op not in PAULI_MATRICES:
                raise ValueError(f"unknown Pauli letter {op!r}")
            if not 0 <= q < self.num_qubits:
                raise IndexError(f"qubit {q} out of range for {self.num_qubits} qubits")
            if q in seen:
                raise ValueError(f"qubit {q} appears twice")
            seen.add(q)

    @classmethod
    def parse(cls, num_qubits: int, text: str, prefactor: float = 1.0) -> "PauliString":
        """``"Y1 X0 Z3"`` style constructor."""
        factors = {int(tok[1:]): tok[0].upper() for tok in text.split()}
        return cls(num_qubits, factors, prefactor)

    @property
    def flip_mask(self) -> int:
        return sum(1 << q for q, op in self.factors if op in "XY")

    @property
    def sign_mask(self) -> int:
        return sum(1 << q for q, op in self.factors if op in "YZ")

    @property
    def num_y(self) -> int:
        return sum(op == "Y" for _, op in self.factors)

    @property
    def is_diagonal(self) -> bool:
        return self.flip_mask == 0

    @property
    def phase(self) -> complex:
        # (P psi)[y] = (-i)^{n_Y} (-1)^{popcount(y & sign_mask)} psi[y ^ flip_mask]
        return (-1j) ** self.num_y

    def scaled(self, prefactor: float) -> "PauliString":
        return PauliString(self.num_qubits, self.factors, prefactor)

    def __str__(self):
        body = " ".join(f"{op}{q}" for q, op in reversed(self.factors))
        return f"{self.prefactor:g}*{body}"


def _negate_where_set(vec: np.ndarray, mask: int) -> None:
    """In place: vec[y] *= (-1)^{popcount(y & mask)}."""
    q = 0
    while mask:
        if mask & 1:
            vec.reshape(-1, 2, 1 << q)[:, 1, :] *= -1
        mask >>= 1
        q += 1


def _flipped(vec: np.ndarray, num_qubits: int, mask: int) -> np.ndarray:
    """Return a contiguous copy of vec[y ^ mask]."""
    if mask == 0:
        return vec.copy()
    axes = tuple(num_qubits - 1 - q for q in range(num_qubits) if mask >> q & 1)
    t = vec.reshape([2] * num_qubits)
    return np.ascontiguousarray(np.flip(t, axis=axes)).reshape(-1)


def parity_signs(num_qubits: int, mask: int) -> np.ndarray:
    """Vector of (-1)^{popcount(y & mask)} over all 2^N indices."""
    out = np.ones(1 << num_qubits)
    _negate_where_set(out, mask)
    return out


def pauli_apply(vec: np.ndarray, num_qubits: int, pauli: PauliString) -> np.ndarray:
    """P @ vec without the prefactor, returned as a new array."""
    out = _flipped(vec, num_qubits, pauli.flip_mask)
    _negate_where_set(out, pauli.sign_mask)
    ph = pauli.phase
    if ph != 1:
        out *= ph
    return out


def _check_pauli(state: StateVector, pauli: PauliString) -> None:
    if pauli.num_qubits != state.num_qubits:
        raise ValueError(
            f"Pauli string on {pauli.num_qubits} qubits applied to {state.num_qubits}-qubit state"
        )


def rotate_vector(vec: np.ndarray, num_qubits: int, pauli: PauliString, theta: float) -> None:
    """In place: vec <- exp(-i theta P) vec, with P the bare Pauli string."""
    c, s = np.cos(theta), np.sin(theta)
    if pauli.is_diagonal:
        signs = parity_signs(num_qubits, pauli.sign_mask)
        vec *= c - 1j * s * signs
        return
    pv = pauli_apply(vec, num_qubits, pauli)
    vec *= c
    pv *= -1j * s
    vec += pv


def _rotate_generic(vec: np.ndarray, num_qubits: int, pauli: PauliString, theta: float) -> None:
    # cos/sin path for every string, used to cross-check the diagonal shortcut
    pv = pauli_apply(vec, num_qubits, pauli)
    vec *= np.cos(theta)
    vec += -1j * np.sin(theta) * pv


def apply_pauli_rotation(state: StateVector, pauli: PauliString, theta: float) -> None:
    """In place: state <- exp(-i theta P) state; the prefactor of P is ignored."""
    _check_pauli(state, pauli)
    rotate_vector(state.amplitudes, state.num_qubits, pauli, theta)


def apply_diagonal(
    state: StateVector,
    energies: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    gamma: float,
    chunk: int = 1 << 16,
) -> None:
    """In place: psi_q <- exp(-i gamma E(q)) psi_q.

    ``energies`` is either a precomputed vector of length 2^N or a vectorised
    callable evaluated chunk by chunk on index arrays.
    """
    amps = state.amplitudes
    if gamma == 0:
        return
    if callable(energies):
        for start in range(0, amps.size, chunk):
            idx = np.arange(start, min(start + chunk, amps.size))
            amps[idx] *= np.exp(-1j * gamma * np.asarray(energies(idx), dtype=float))
    else:
        e = np.asarray(energies, dtype=float)
        if e.shape != amps.shape:
            raise ValueError("energy vector length does not match the state")
        amps *= np.exp(-1j * gamma * e)


class PauliOperator:
    """Matrix-free Hermitian operator sum_t c_t P_t.

    Terms sharing a flip mask are merged into one diagonal coefficient vector,
    so ``matvec`` costs one strided pass per distinct mask.
    """

    def __init__(self, terms: Sequence[PauliString], num_qubits: int | None = None):
        terms = list(terms)
        if not terms:
            raise ValueError("operator needs at least one term")
        n = terms[0].num_qubits if num_qubits is None else num_qubits
        for t in terms:
            if t.num_qubits != n:
                raise ValueError("all terms must act on the same number of qubits")
        self.num_qubits = n
        self.terms = terms
        self._blocks: list[tuple[int, np.ndarray]] | None = None

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def _compile(self) -> list[tuple[int, np.ndarray]]:
        groups: dict[int, np.ndarray] = {}
        for t in self.terms:
            d = groups.get(t.flip_mask)
            if d is None:
                d = groups[t.flip_mask] = np.zeros(self.dim, dtype=complex)
            d += (t.prefactor * t.phase) * parity_signs(self.num_qubits, t.sign_mask)
        blocks = []
        for mask in sorted(groups):
            d = groups[mask]
            if not np.any(d.imag):
                d = d.real.copy()
            if np.any(d):
                blocks.append((mask, d))
        return blocks

    @property
    def blocks(self) -> list[tuple[int, np.ndarray]]:
        if self._blocks is None:
            self._blocks = self._compile()
        return self._blocks

    @property
    def is_real(self) -> bool:
        return all(d.dtype.kind == "f" for _, d in self.blocks)

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec)
        if vec.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got {vec.shape}")
        out = np.zeros(self.dim, dtype=complex)
        t = vec.reshape([2] * self.num_qubits)
        n = self.num_qubits
        for mask, d in self.blocks:
            if mask == 0:
                out += d * vec
            else:
                axes = tuple(n - 1 - q for q in range(n) if mask >> q & 1)
                out += d * np.flip(t, axis=axes).reshape(-1)
        return out

    __call__ = matvec

    def expectation(self, vec: np.ndarray) -> float:
        value = np.vdot(vec, self.matvec(vec))
        if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
            raise ValueError(f"expectation has imaginary part {value.imag:.3e}; operator not Hermitian?")
        return float(value.real)


def expectation(state: StateVector, terms: Iterable[PauliString] | PauliOperator) -> float:
    """sum_t prefactor_t <psi|P_t|psi>, matrix-free."""
    op = terms if isinstance(terms, PauliOperator) else PauliOperator(list(terms))
    if op.num_qubits != state.num_qubits:
        raise ValueError("operator and state dimensions differ")
    return op.expectation(state.amplitudes)


def probability_of(state: StateVector, targets: Iterable[str]) -> float:
    """Total probability of a set of ket labels."""
    targets = set(targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    total = 0.0
    for label in targets:
        if len(label) != state.num_qubits:
            raise ValueError(f"bitstring {label!r} does not have length {state.num_qubits}")
        total += abs(state.amplitudes[label_to_index(label)]) ** 2
    return float(min(total, 1.0))


def sample(state: StateVector, shots: int, seed: int | None = None) -> dict[str, int]:
    """Draw ``shots`` measurement outcomes; keys are ket labels."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = state.probabilities()
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, p)
    nz = np.flatnonzero(counts)
    return {index_to_label(int(q), state.num_qubits): int(counts[q]) for q in nz}


def dense_pauli_matrix(pauli: PauliString) -> np.ndarray:
    """Explicit 2^N x 2^N matrix of a Pauli string via Kronecker products (oracle use)."""
    letters = dict(pauli.factors)
    mat = np.array([[1.0 + 0j]])
    for q in reversed(range(pauli.num_qubits)):
        mat = np.kron(mat, PAULI_MATRICES[letters[q]] if q in letters else I2)
    return pauli.prefactor * mat


def dense_single_qubit(gate: np.ndarray, j: int, num_qubits: int) -> np.ndarray:
    mat = np.array([[1.0 + 0j]])
    for q in reversed(range(num_qubits)):
        mat = np.kron(mat, gate if q == j else I2)
    return mat
