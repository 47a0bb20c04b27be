"""Problem models: exact cover, Ising cost Hamiltonians and Heisenberg spin models.

Assignment strings in this module list variables in index order, character
``i`` being ``x_i`` (route ``i`` / qubit ``i``).  That is the reverse of the
ket labels used by :mod:`hybridqc.statevector`; use :func:`assignment_to_index`
and :func:`index_to_assignment` to move between them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .statevector import PauliString, check_memory

BRUTE_FORCE_CAP = 24


def assignment_to_index(bits: str) -> int:
    if set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")
    return sum(1 << i for i, c in enumerate(bits) if c == "1")


def index_to_assignment(index: int, n: int) -> str:
    return "".join("1" if index >> i & 1 else "0" for i in range(n))


def assignment_to_label(bits: str) -> str:
    """Assignment string (x_0 first) to ket label (q_{N-1} first)."""
    return bits[::-1]


@dataclass(frozen=True)
class ExactCoverInstance:
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.int64)
        if A.ndim != 2 or A.size == 0:
            raise ValueError("A must be a nonempty 2-D matrix")
        if not np.isin(A, (0, 1)).all():
            raise ValueError("A must be Boolean")
        if not A.any(axis=0).all():
            missing = np.flatnonzero(~A.any(axis=0)).tolist()
            raise ValueError(f"flights {missing} are not covered by any route")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def num_routes(self) -> int:
        return self.A.shape[0]

    @property
    def num_flights(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class IsingModel:
    """H_C = sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j, plus a constant ``offset``."""

    num_qubits: int
    h: np.ndarray
    J: dict = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.num_qubits,):
            raise ValueError(f"h must have length {self.num_qubits}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        J = {}
        for (i, j), v in dict(self.J).items():
            i, j = int(i), int(j)
            if not 0 <= i < j < self.num_qubits:
                raise ValueError(f"coupling key ({i}, {j}) must satisfy i < j < N")
            J[(i, j)] = float(v)
        object.__setattr__(self, "J", J)

    def terms(self) -> list[PauliString]:
        """Pauli-string form of the cost Hamiltonian (the offset is not included)."""
        n = self.num_qubits
        out = [PauliString(n, {i: "Z"}, float(v)) for i, v in enumerate(self.h) if v != 0]
        out += [PauliString(n, {i: "Z", j: "Z"}, v) for (i, j), v in sorted(self.J.items()) if v != 0]
        return out


@dataclass(frozen=True)
class HeisenbergModel:
    num_spins: int
    edges: tuple

    def __post_init__(self):
        edges = []
        seen = set()
        for e in self.edges:
            i, j, jxx, jyy, jzz = e
            i, j = int(i), int(j)
            if i == j or not (0 <= i < self.num_spins and 0 <= j < self.num_spins):
                raise ValueError(f"invalid edge ({i}, {j}) for {self.num_spins} spins")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            edges.append((i, j, float(jxx), float(jyy), float(jzz)))
        object.__setattr__(self, "edges", tuple(edges))


def _check_bits(bits: str, n: int) -> None:
    if len(bits) != n:
        raise ValueError(f"bitstring length {len(bits)} != {n}")
    if set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")


def cover_cost(inst: ExactCoverInstance, x: str) -> int:
    """C(x) = sum_f (sum_i A_if x_i - 1)^2."""
    _check_bits(x, inst.num_routes)
    xv = np.array([int(c) for c in x], dtype=np.int64)
    return int(((xv @ inst.A - 1) ** 2).sum())


def cover_costs(inst: ExactCoverInstance) -> np.ndarray:
    """C(x) for every amplitude index (bit i of the index is x_i)."""
    n = inst.num_routes
    check_memory(n)
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.int64)
    for col in inst.A.T:
        covered = np.zeros(1 << n, dtype=np.int64)
        for i in np.flatnonzero(col):
            covered += (idx >> int(i)) & 1
        out += (covered - 1) ** 2
    return out


def cover_to_ising(inst: ExactCoverInstance) -> IsingModel:
    """Ising form of C(x) under x_i = (1 - s_i)/2.

    With n_f routes covering flight f and c_f = n_f/2 - 1, each squared
    penalty expands to c_f^2 + n_f/4 - c_f sum_i A_if s_i
    + 1/2 sum_{i<j} A_if A_jf s_i s_j.
    """
    A = inst.A.astype(float)
    n_f = A.sum(axis=0)
    c_f = n_f / 2.0 - 1.0
    h = -(A * c_f).sum(axis=1)
    overlap = 0.5 * (A @ A.T)
    J = {
        (i, j): float(overlap[i, j])
        for i in range(inst.num_routes)
        for j in range(i + 1, inst.num_routes)
        if overlap[i, j] != 0
    }
    offset = float((c_f**2 + n_f / 4.0).sum())
    return IsingModel(inst.num_routes, h, J, offset)


def ising_energy(model: IsingModel, x: str) -> float:
    """sum_i h_i s_i + sum_{i<j} J_ij s_i s_j with s_i = 1 - 2 x_i (offset excluded)."""
    _check_bits(x, model.num_qubits)
    s = np.array([1 - 2 * int(c) for c in x], dtype=float)
    e = float(model.h @ s)
    for (i, j), v in model.J.items():
        e += v * s[i] * s[j]
    return e


def ising_energies(model: IsingModel, indices: np.ndarray | None = None) -> np.ndarray:
    """Vectorised ising_energy over amplitude indices (all 2^N by default)."""
    n = model.num_qubits
    if indices is None:
        check_memory(n)
        indices = np.arange(1 << n, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    spins = [1.0 - 2.0 * ((indices >> i) & 1) for i in range(n)]
    e = np.zeros(indices.shape, dtype=float)
    for i, v in enumerate(model.h):
        if v:
            e += v * spins[i]
    for (i, j), v in model.J.items():
        e += v * spins[i] * spins[j]
    return e


def ground_states_bruteforce(model: IsingModel, cap: int = BRUTE_FORCE_CAP, atol: float = 1e-9):
    """Exhaustive minimum of the Ising energy; returns (E0, set of assignment strings)."""
    n = model.num_qubits
    if n > cap:
        raise ValueError(f"brute force limited to {cap} qubits, got {n}")
    e = ising_energies(model)
    e0 = float(e.min())
    idx = np.flatnonzero(e <= e0 + atol)
    return e0, {index_to_assignment(int(q), n) for q in idx}


def ground_indices(model: IsingModel, cap: int = BRUTE_FORCE_CAP, atol: float = 1e-9) -> np.ndarray:
    n = model.num_qubits
    if n > cap:
        raise ValueError(f"brute force limited to {cap} qubits, got {n}")
    e = ising_energies(model)
    return np.flatnonzero(e <= e.min() + atol)


def heisenberg_ring(n: int, jxx: float = 1.0, jyy: float = 1.0, jzz: float = 1.0,
                    periodic: bool = True) -> HeisenbergModel:
    """Nearest-neighbour chain; closes into a ring unless ``periodic`` is False."""
    if n < 2:
        raise ValueError("need at least 2 spins")
    edges = [(i, i + 1, jxx, jyy, jzz) for i in range(n - 1)]
    if periodic and n > 2:
        edges.append((n - 1, 0, jxx, jyy, jzz))
    return HeisenbergModel(n, tuple(edges))


def heisenberg_terms(model: HeisenbergModel) -> list[PauliString]:
    n = model.num_spins
    out = []
    for i, j, jxx, jyy, jzz in model.edges:
        for letter, coupling in (("X", jxx), ("Y", jyy), ("Z", jzz)):
            if coupling != 0:
                out.append(PauliString(n, {i: letter, j: letter}, coupling))
    return out


def neel_state(n: int) -> str:
    """Alternating assignment with even qubit indices set to 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return "".join("1" if i % 2 == 0 else "0" for i in range(n))


def random_cover_instance(n: int, f: int, seed: int | None = None,
                          planted_routes: int | None = None,
                          density: float = 0.3) -> ExactCoverInstance:
    """Instance with a planted exact cover.

    The flights are partitioned into ``planted_routes`` nonempty routes; the
    remaining ``n - planted_routes`` rows are random distractor routes.  Rows
    are then shuffled so the planted solution sits at random positions.
    """
    if n < 1 or f < 1:
        raise ValueError("need at least one route and one flight")
    rng = np.random.default_rng(seed)
    if planted_routes is None:
        planted_routes = max(1, min(f, n // 2))
    if planted_routes > n:
        raise ValueError(f"cannot plant {planted_routes} routes among {n}")
    if planted_routes > f:
        raise ValueError(f"cannot split {f} flights into {planted_routes} nonempty routes")
    # every planted route gets one flight, the rest are spread at random
    owner = np.concatenate([rng.permutation(planted_routes),
                            rng.integers(0, planted_routes, f - planted_routes)])
    owner = owner[rng.permutation(f)]
    A = np.zeros((n, f), dtype=np.int64)
    A[owner, np.arange(f)] = 1
    for r in range(planted_routes, n):
        row = (rng.random(f) < density).astype(np.int64)
        if not row.any():
            row[rng.integers(f)] = 1
        A[r] = row
    A = A[rng.permutation(n)]
    return ExactCoverInstance(A)


def read_cover(path: str | Path) -> ExactCoverInstance:
    return parse_cover(Path(path).read_text())


def parse_cover(text: str) -> ExactCoverInstance:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        n, f = (int(v) for v in lines[0].split())
    except (IndexError, ValueError) as exc:
        raise ValueError("cover file header must be 'N F'") from exc
    rows = ["".join(ln.split()) for ln in lines[1:]]
    if len(rows) != n:
        raise ValueError(f"expected {n} route lines, got {len(rows)}")
    A = []
    for k, row in enumerate(rows):
        if len(row) != f or set(row) - {"0", "1"}:
            raise ValueError(f"route line {k + 1} must be {f} characters of 0/1")
        A.append([int(c) for c in row])
    return ExactCoverInstance(np.array(A))


def format_cover(inst: ExactCoverInstance) -> str:
    rows = ["".join(str(int(v)) for v in row) for row in inst.A]
    return f"{inst.num_routes} {inst.num_flights}\n" + "\n".join(rows) + "\n"


def read_heisenberg(path: str | Path) -> HeisenbergModel:
    return parse_heisenberg(Path(path).read_text())


def parse_heisenberg(text: str) -> HeisenbergModel:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        n = int(lines[0])
        edges = []
        for ln in lines[1:]:
            i, j, a, b, c = ln.split()
            edges.append((int(i), int(j), float(a), float(b), float(c)))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed Heisenberg file: {exc}") from exc
    return HeisenbergModel(n, tuple(edges))


def format_heisenberg(model: HeisenbergModel) -> str:
    rows = [f"{i} {j} {a:g} {b:g} {c:g}" for i, j, a, b, c in model.edges]
    return f"{model.num_spins}\n" + "\n".join(rows) + "\n"
