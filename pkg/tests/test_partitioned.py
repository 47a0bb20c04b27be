import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridqc.partitioned import (
    apply_gate_partitioned,
    apply_two_qubit_partitioned,
    gather,
    split,
)
from hybridqc.runner import random_circuit
from hybridqc.statevector import H, StateVector, apply_single_qubit, apply_two_qubit, init_basis


def random_state(n, rng):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, v / np.linalg.norm(v))


def replay(n, m, gates, seed, frac):
    rng = np.random.default_rng(seed)
    mono = random_state(n, rng)
    ps = split(mono.copy(), m)
    for g in random_circuit(n, gates, seed, frac if m >= 2 else 0.0):
        if g[0] == "1q":
            apply_single_qubit(mono, g[1], g[2])
            apply_gate_partitioned(ps, g[1], g[2])
        else:
            apply_two_qubit(mono, g[1], g[2], g[3])
            apply_two_qubit_partitioned(ps, g[1], g[2], g[3])
    return mono, ps


def test_split_layout():
    psi = StateVector(2, np.array([1, 2, 3, 4], dtype=complex) / np.sqrt(30))
    ps = split(psi, 1)
    np.testing.assert_array_equal(ps.partitions[0].local_amplitudes, psi.amplitudes[:2])
    np.testing.assert_array_equal(ps.partitions[1].local_amplitudes, psi.amplitudes[2:])
    assert split(psi, 2).num_ranks == 1
    assert split(StateVector(3, np.eye(8)[0]), 1).num_ranks == 4
    assert all(p.local_amplitudes.size == 2 for p in split(StateVector(3, np.eye(8)[0]), 1).partitions)


@pytest.mark.parametrize("m", range(1, 6))
def test_round_trip_exact(m):
    psi = random_state(5, np.random.default_rng(m))
    np.testing.assert_array_equal(gather(split(psi, m)).amplitudes, psi.amplitudes)


def test_invalid_local_count():
    with pytest.raises(ValueError):
        split(init_basis(3, "000"), 0)
    with pytest.raises(ValueError):
        split(init_basis(3, "000"), 4)


def test_local_gate_moves_nothing():
    ps = split(init_basis(4, "0000"), 2)
    apply_gate_partitioned(ps, 1, H)
    assert ps.stats.amplitudes_exchanged == 0 and ps.stats.local_applications == 1


@pytest.mark.parametrize("n,m", [(3, 1), (4, 2), (6, 3), (8, 7)])
def test_global_gate_moves_half_the_vector(n, m):
    ps = split(init_basis(n, "0" * n), m)
    apply_gate_partitioned(ps, n - 1, H)
    assert ps.stats.amplitudes_exchanged == 2 ** (n - 1)
    assert ps.stats.global_applications == 1


def test_hadamard_on_global_qubit():
    n = 4
    mono = init_basis(n, "0" * n)
    ps = split(mono.copy(), 2)
    apply_single_qubit(mono, 3, H)
    apply_gate_partitioned(ps, 3, H)
    np.testing.assert_array_equal(gather(ps).amplitudes, mono.amplitudes)


def test_relabelling_pays_once():
    ps = split(init_basis(5, "00000"), 2)
    apply_gate_partitioned(ps, 4, H)
    moved = ps.stats.amplitudes_exchanged
    apply_gate_partitioned(ps, 4, H)
    assert ps.stats.amplitudes_exchanged == moved
    assert ps.stats.local_applications == 1


def test_victim_is_lowest_free_local_slot():
    ps = split(init_basis(5, "00000"), 3)
    apply_gate_partitioned(ps, 4, H)
    assert ps.qubit_map[4] == 0 and ps.qubit_map[0] == 4
    apply_two_qubit_partitioned(ps, 4, 3, np.eye(4))
    # qubit 4 occupies slot 0, so qubit 3 takes slot 1
    assert ps.qubit_map[3] == 1


def test_two_qubit_needs_two_local_slots():
    with pytest.raises(ValueError):
        apply_two_qubit_partitioned(split(init_basis(3, "000"), 1), 0, 2, np.eye(4))


@pytest.mark.parametrize("n", [2, 5, 8, 10])
def test_all_m_match_monolithic(n):
    for m in range(1, n + 1):
        mono, ps = replay(n, m, 100, seed=10 * n + m, frac=0.3)
        err = np.abs(gather(ps).amplitudes - mono.amplitudes).max()
        assert err < 1e-12
        assert abs(gather(ps).norm_squared() - 1) < 1e-10
        assert sorted(ps.qubit_map) == list(range(n))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))),
       st.integers(0, 200), st.integers(0, 10**6), st.floats(0, 1))
def test_equivalence_property(nm, gates, seed, frac):
    n, m = nm
    mono, ps = replay(n, m, gates, seed, frac)
    assert np.abs(gather(ps).amplitudes - mono.amplitudes).max() < 1e-12
    assert sorted(ps.qubit_map) == list(range(n))
    s = ps.stats
    assert s.gates == gates == s.local_applications + s.global_applications
    # each exchange round moves exactly half the vector
    assert s.amplitudes_exchanged == s.exchange_rounds * 2 ** (n - 1)


def test_accounting_per_gate():
    rng = np.random.default_rng(0)
    n, m = 7, 4
    ps = split(random_state(n, rng), m)
    for q in rng.integers(n, size=60):
        before = ps.stats.amplitudes_exchanged
        was_local = ps.is_local(int(q))
        apply_gate_partitioned(ps, int(q), H)
        assert ps.stats.amplitudes_exchanged - before == (0 if was_local else 2 ** (n - 1))
