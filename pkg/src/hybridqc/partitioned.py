"""Rank-partitioned state vector with global/local qubit relabelling.

The state is split over 2^(N-M) in-process "ranks" of 2^M amplitudes each.
Physical slots 0..M-1 are local (inside a rank), slots M..N-1 are global
(the rank number).  A gate on a global qubit first swaps that slot with a
local one by a pairwise half-buffer exchange, then runs locally; the new
labelling is kept, so a second gate on the same qubit needs no exchange.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .statevector import StateVector, apply_single_qubit, apply_two_qubit


@dataclass
class Partition:
    rank: int
    local_amplitudes: np.ndarray


@dataclass
class ExchangeStats:
    gates: int = 0
    local_applications: int = 0
    global_applications: int = 0
    amplitudes_exchanged: int = 0
    exchange_rounds: int = 0

    def as_dict(self) -> dict:
        return {
            "gates": self.gates,
            "local_applications": self.local_applications,
            "global_applications": self.global_applications,
            "amplitudes_exchanged": self.amplitudes_exchanged,
            "exchange_rounds": self.exchange_rounds,
        }


@dataclass
class PartitionedState:
    num_qubits: int
    num_local: int
    partitions: list[Partition]
    qubit_map: list[int]
    stats: ExchangeStats = field(default_factory=ExchangeStats)

    @property
    def num_ranks(self) -> int:
        return len(self.partitions)

    def is_local(self, qubit: int) -> bool:
        return self.qubit_map[qubit] < self.num_local

    def norm_squared(self) -> float:
        return float(sum(np.vdot(p.local_amplitudes, p.local_amplitudes).real for p in self.partitions))


def split(state: StateVector, num_local: int) -> PartitionedState:
    n = state.num_qubits
    if not 1 <= num_local <= n:
        raise ValueError(f"local qubit count must be in [1, {n}], got {num_local}")
    chunk = 1 << num_local
    parts = [
        Partition(r, state.amplitudes[r * chunk:(r + 1) * chunk].copy())
        for r in range(1 << (n - num_local))
    ]
    return PartitionedState(n, num_local, parts, list(range(n)))


def _exchange(ps: PartitionedState, global_slot: int, local_slot: int) -> None:
    """Swap a global slot with a local slot across rank pairs.

    Rank r with global bit b keeps its half whose local bit equals b and
    trades the other half with its partner r ^ (1 << (global_slot - M)).
    """
    m = ps.num_local
    gbit = global_slot - m
    moved = 0
    for r in range(ps.num_ranks):
        partner = r ^ (1 << gbit)
        if partner < r:
            continue
        # r has global bit 0, partner has global bit 1
        mine = ps.partitions[r].local_amplitudes.reshape(-1, 2, 1 << local_slot)
        theirs = ps.partitions[partner].local_amplitudes.reshape(-1, 2, 1 << local_slot)
        send = mine[:, 1, :].copy()
        mine[:, 1, :] = theirs[:, 0, :]
        theirs[:, 0, :] = send
        moved += 2 * send.size
    ps.stats.amplitudes_exchanged += moved
    ps.stats.exchange_rounds += 1
    inv = {slot: q for q, slot in enumerate(ps.qubit_map)}
    qa, qb = inv[global_slot], inv[local_slot]
    ps.qubit_map[qa], ps.qubit_map[qb] = local_slot, global_slot


def _localize(ps: PartitionedState, qubits: tuple[int, ...]) -> None:
    """Bring every qubit in ``qubits`` to a local slot, lowest free local slot first."""
    for q in qubits:
        slot = ps.qubit_map[q]
        if slot < ps.num_local:
            continue
        busy = {ps.qubit_map[o] for o in qubits}
        victim = next(s for s in range(ps.num_local) if s not in busy)
        _exchange(ps, slot, victim)


def apply_gate_partitioned(ps: PartitionedState, qubit: int, gate: np.ndarray) -> None:
    if not 0 <= qubit < ps.num_qubits:
        raise IndexError(f"qubit {qubit} out of range for {ps.num_qubits} qubits")
    ps.stats.gates += 1
    if ps.is_local(qubit):
        ps.stats.local_applications += 1
    else:
        ps.stats.global_applications += 1
        _localize(ps, (qubit,))
    slot = ps.qubit_map[qubit]
    for p in ps.partitions:
        apply_single_qubit(_local_view(ps, p), slot, gate)


def apply_two_qubit_partitioned(ps: PartitionedState, j: int, k: int, gate: np.ndarray) -> None:
    """Two-qubit gate; global operands are relabelled one at a time."""
    for q in (j, k):
        if not 0 <= q < ps.num_qubits:
            raise IndexError(f"qubit {q} out of range for {ps.num_qubits} qubits")
    if ps.num_local < 2:
        raise ValueError("two-qubit gates need at least 2 local qubits")
    ps.stats.gates += 1
    if ps.is_local(j) and ps.is_local(k):
        ps.stats.local_applications += 1
    else:
        ps.stats.global_applications += 1
        _localize(ps, (j, k))
    sj, sk = ps.qubit_map[j], ps.qubit_map[k]
    for p in ps.partitions:
        apply_two_qubit(_local_view(ps, p), sj, sk, gate)


def _local_view(ps: PartitionedState, p: Partition) -> StateVector:
    # shares memory with the partition buffer
    sv = StateVector.__new__(StateVector)
    sv.num_qubits = ps.num_local
    sv.amplitudes = p.local_amplitudes
    return sv


def gather(ps: PartitionedState) -> StateVector:
    """Reassemble the logical state vector, undoing the current relabelling."""
    n = ps.num_qubits
    physical = np.concatenate([p.local_amplitudes for p in ps.partitions])
    t = physical.reshape([2] * n)
    # axis a of t is physical slot n-1-a; logical axis for qubit q must be n-1-q
    order = [n - 1 - ps.qubit_map[n - 1 - a] for a in range(n)]
    return StateVector(n, np.ascontiguousarray(np.transpose(t, order)).reshape(-1))
