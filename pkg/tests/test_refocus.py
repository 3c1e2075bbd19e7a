import numpy as np
import pytest

from zzcompile.molecule import load_molecule, spin_system
from zzcompile.paulis import PauliString, equal_up_to_global_phase, pauli_exponential
from zzcompile.refocus import RefocusError, refocus_block, toggling_patterns
from zzcompile.sequence import Rotation, sequence_duration, sequence_propagator

CROTONIC_TRIPLES = [[1, 2, 72.4], [1, 3, -1.3], [1, 4, 7.0],
                    [2, 3, 70.3], [2, 4, -1.6], [3, 4, 41.3]]


@pytest.fixture(scope="module")
def crotonic():
    return load_molecule("crotonic-acid")


def test_two_spin_pattern():
    p = toggling_patterns(2, (1, 2), 2)
    assert p.matrix == ((1, -1), (1, -1))


def test_eight_segment_pattern():
    p = toggling_patterns(4, (1, 2), 8)
    s = p.matrix
    assert s[0] == s[1] == (1, 1, 1, 1, -1, -1, -1, -1)
    assert s[2] == (1, 1, -1, -1, -1, -1, 1, 1)
    assert s[3] == (1, -1, -1, 1, 1, -1, -1, 1)
    for row in s:
        assert sum(row) == 0
    for a, b in [(0, 2), (0, 3), (2, 3)]:
        assert sum(x * y for x, y in zip(s[a], s[b])) == 0


def test_pattern_for_other_pairs():
    for pair in [(1, 3), (2, 4), (3, 4)]:
        p = toggling_patterns(4, pair, 8)
        k, l = pair
        assert p.matrix[k - 1] == p.matrix[l - 1]
        p.validate()


def test_insufficient_segments():
    with pytest.raises(RefocusError, match="insufficient"):
        toggling_patterns(4, (1, 2), 2)


def test_non_power_of_two_segments():
    with pytest.raises(RefocusError):
        toggling_patterns(4, (1, 2), 6)


def test_small_m_fallback_rows():
    # m=4 cannot host the one-flip-per-boundary family but still works
    p = toggling_patterns(4, (1, 2), 4)
    p.validate()


def test_pattern_csv():
    csv = toggling_patterns(2, (1, 2), 2).to_csv()
    assert csv.splitlines()[0] == "spin,seg1,seg2"
    assert csv.splitlines()[1] == "1,+1,-1"


def crotonic_ideal(sys, pair, tau):
    theta = 0.5 * np.pi * sys.coupling(*pair) * tau
    return pauli_exponential(PauliString.z_string(sys.n, pair), theta, sys.n)


@pytest.mark.parametrize("pair", [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])
def test_refocus_exactness_all_pairs(crotonic, pair):
    tau = 1.0 / (2 * abs(crotonic.coupling(*pair)))
    seq = refocus_block(crotonic, pair, tau, 8)
    u = sequence_propagator(seq, crotonic)
    v = equal_up_to_global_phase(u, crotonic_ideal(crotonic, pair, tau), 1e-10)
    assert v.equal, f"pair {pair}: deviation {v.deviation}"


def test_refocus_shift_independence(crotonic):
    pair, tau = (1, 2), 1.0 / (2 * 72.4)
    seq = refocus_block(crotonic, pair, tau, 8)
    scaled = spin_system(4, [s * 10 for s in crotonic.shifts], CROTONIC_TRIPLES)
    u = sequence_propagator(seq, scaled)
    v = equal_up_to_global_phase(u, crotonic_ideal(crotonic, pair, tau), 1e-10)
    assert v.equal


def test_refocus_non_target_independence(crotonic):
    pair, tau = (2, 3), 1.0 / (2 * 70.3)
    seq = refocus_block(crotonic, pair, tau, 8)
    stripped = spin_system(4, crotonic.shifts, [[2, 3, 70.3]])
    u_full = sequence_propagator(seq, crotonic)
    u_stripped = sequence_propagator(seq, stripped)
    assert equal_up_to_global_phase(u_full, u_stripped, 1e-10).equal


def test_refocus_duration_exact(crotonic):
    tau = 1.0 / (2 * 72.4)
    seq = refocus_block(crotonic, (1, 2), tau, 8)
    assert sequence_duration(seq) == tau


def test_refocus_core_block_fraction(crotonic):
    # tau = J_eff*T / J_34 at pi*J_eff*T = pi/4
    tau = 0.25 / 41.3
    seq = refocus_block(crotonic, (3, 4), tau, 8)
    u = sequence_propagator(seq, crotonic)
    ideal = pauli_exponential(PauliString.z_string(4, (3, 4)), np.pi / 8, 4)
    assert equal_up_to_global_phase(u, ideal, 1e-10).equal


def test_pi_pulse_count_single_flip_row(crotonic):
    # the pair row ++++---- flips once internally and once terminally
    seq = refocus_block(crotonic, (1, 2), 1.0 / (2 * 72.4), 8)
    pulses_on_1 = sum(1 for i in seq if isinstance(i, Rotation) and 1 in i.spins)
    assert pulses_on_1 == 2


def test_rows_end_restored(crotonic):
    p = toggling_patterns(4, (2, 3), 8)
    for row in p.matrix:
        flips = sum(a != b for a, b in zip(row, row[1:])) + (row[-1] == -1)
        assert flips % 2 == 0


def test_refocus_rejects_zero_coupling():
    sys = spin_system(3, [0.0] * 3, [[1, 2, 10.0]])
    with pytest.raises(RefocusError):
        refocus_block(sys, (1, 3), 0.01, 4)


def test_refocus_rejects_non_positive_tau(crotonic):
    with pytest.raises(RefocusError):
        refocus_block(crotonic, (1, 2), 0.0, 8)
