import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinmem.spin import (
    MAX_DENSE_SPINS,
    DenseLimitError,
    SpinSystem,
    collective_operator,
    count_transitions,
    dipolar_hamiltonian,
    generate_spin_system,
    single_spin_operator,
    zeeman_hamiltonian,
)

SX = np.array([[0, 1], [1, 0]]) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]]) / 2


def kron_op(n, slots):
    """Literal tensor product: ``slots`` maps spin index -> 2x2 matrix."""
    return reduce(np.kron, [slots.get(k, np.eye(2)) for k in range(n)])


def oracle_dipolar(couplings):
    n = len(couplings)
    H = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            H += couplings[i][j] * (
                2 * kron_op(n, {i: SZ, j: SZ}) - kron_op(n, {i: SX, j: SX}) - kron_op(n, {i: SY, j: SY})
            )
    return H


def comm(a, b):
    return a @ b - b @ a


couplings_strategy = st.integers(1, 4).flatmap(
    lambda n: st.lists(
        st.floats(-2000, 2000, allow_nan=False), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2
    ).map(lambda vals: (n, vals))
)


def system_from(n, vals, offsets=None):
    d = np.zeros((n, n))
    d[np.triu_indices(n, 1)] = vals
    d = d + d.T
    return SpinSystem(np.zeros(n) if offsets is None else offsets, d)


def test_single_spin_z():
    np.testing.assert_array_equal(single_spin_operator(1, 0, "z"), np.diag([0.5, -0.5]))


def test_second_spin_x_flips_second_bit():
    op = single_spin_operator(2, 1, "x")
    expected = np.zeros((4, 4))
    for s in range(4):
        expected[s ^ 1, s] = 0.5
    np.testing.assert_array_equal(op, expected)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_single_spin_operators_hermitian_traceless(n, axis):
    for i in range(n):
        op = single_spin_operator(n, i, axis)
        assert np.trace(op) == 0
        assert np.max(np.abs(op - op.conj().T)) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_commutator_identity(n):
    for i in range(n):
        ix, iy, iz = (single_spin_operator(n, i, a) for a in "xyz")
        np.testing.assert_allclose(comm(ix, iy), 1j * iz, atol=1e-15)


def test_single_spin_errors():
    with pytest.raises(IndexError):
        single_spin_operator(2, 2, "x")
    with pytest.raises(DenseLimitError):
        single_spin_operator(MAX_DENSE_SPINS + 1, 0, "x")


def test_raising_operator():
    np.testing.assert_array_equal(collective_operator(1, "+"), [[0, 1], [0, 0]])


def test_collective_z_counts_up_spins():
    diag = np.diag(collective_operator(3, "z")).real
    for s, value in enumerate(diag):
        ups = 3 - bin(s).count("1")
        assert value == (ups - (3 - ups)) / 2


def test_collective_x_is_sum():
    np.testing.assert_array_equal(
        collective_operator(2, "x"), single_spin_operator(2, 0, "x") + single_spin_operator(2, 1, "x")
    )


def test_zero_couplings_zero_hamiltonian():
    sys = SpinSystem(np.zeros(3), np.zeros((3, 3)))
    assert not np.any(dipolar_hamiltonian(sys))


def test_two_spin_spectrum_matches_explicit_matrix():
    d = 100.0
    H = dipolar_hamiltonian(SpinSystem([0, 0], [[0, d], [d, 0]]))
    # basis |uu>, |ud>, |du>, |dd>; written out by hand
    explicit = np.array(
        [
            [d / 2, 0, 0, 0],
            [0, -d / 2, -d / 2, 0],
            [0, -d / 2, -d / 2, 0],
            [0, 0, 0, d / 2],
        ]
    )
    np.testing.assert_allclose(H, explicit, atol=1e-14)
    E, V = np.linalg.eigh(H)
    np.testing.assert_allclose(E, [-d, 0, d / 2, d / 2], atol=1e-12)
    # single-quantum lines: triplet |T+1> <-> |T0> <-> |T-1> at -+3d/2
    Iplus = collective_operator(2, "+")
    amp = np.abs(V.conj().T @ Iplus @ V) ** 2
    lines = sorted(
        round(E[a] - E[b], 9) for a in range(4) for b in range(4) if amp[a, b] > 1e-12
    )
    assert lines == [-150.0, 150.0]


@given(couplings_strategy)
@settings(max_examples=40, deadline=None)
def test_dipolar_matches_kronecker_oracle(case):
    n, vals = case
    sys = system_from(n, vals)
    np.testing.assert_allclose(dipolar_hamiltonian(sys), oracle_dipolar(sys.couplings), atol=1e-14, rtol=0)


@given(couplings_strategy, st.lists(st.floats(-3000, 3000), min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_hamiltonian_hermitian_and_conserves_iz(case, offsets):
    n, vals = case
    sys = system_from(n, vals, offsets[:n])
    iz = collective_operator(n, "z")
    for H in (dipolar_hamiltonian(sys), zeeman_hamiltonian(sys)):
        scale = max(np.max(np.abs(H)), 1e-300)
        assert np.max(np.abs(H - H.conj().T)) <= 1e-12 * scale
        assert np.max(np.abs(comm(H, iz))) < 1e-10


def test_zeeman():
    assert not np.any(zeeman_hamiltonian(SpinSystem(np.zeros(2), np.zeros((2, 2)))))
    np.testing.assert_array_equal(zeeman_hamiltonian(SpinSystem([200.0], [[0.0]])), np.diag([100.0, -100.0]))
    H = zeeman_hamiltonian(generate_spin_system("chain", 3, 100, 1000, 1))
    assert not np.any(H - np.diag(np.diag(H)))


def test_spin_system_validation():
    with pytest.raises(ValueError, match="symmetric"):
        SpinSystem([0, 0], [[0, 1], [2, 0]])
    with pytest.raises(ValueError, match="diagonal"):
        SpinSystem([0, 0], [[1, 0], [0, 0]])
    with pytest.raises(ValueError, match="finite"):
        SpinSystem([0, np.nan], np.zeros((2, 2)))
    with pytest.raises(DenseLimitError):
        SpinSystem(np.zeros(13), np.zeros((13, 13)))


def test_json_round_trip_and_validation():
    sys = generate_spin_system("ring", 5, 300, 800, 3)
    assert SpinSystem.from_json(sys.to_json()) == sys
    with pytest.raises(ValueError, match="symmetric"):
        SpinSystem.from_json('{"n": 2, "offsets_hz": [0, 0], "couplings_hz": [[0, 1], [3, 0]]}')


def test_generate_chain_couplings():
    np.testing.assert_array_equal(generate_spin_system("chain", 2, 100).couplings, [[0, 100], [100, 0]])
    assert generate_spin_system("chain", 3, 800).couplings[0, 2] == 100.0


def test_generate_is_deterministic():
    a = generate_spin_system("chain", 6, 800, 500, seed=7)
    b = generate_spin_system("chain", 6, 800, 500, seed=7)
    assert a == b
    assert np.all(np.abs(a.offsets) <= 250)
    assert a != generate_spin_system("chain", 6, 800, 500, seed=8)


def test_generate_ring_nearest_neighbours_at_unit_distance():
    sys = generate_spin_system("ring", 6, 100)
    for i in range(6):
        assert sys.couplings[i, (i + 1) % 6] == pytest.approx(100.0)
    # opposite corners of a unit hexagon are 2 apart
    assert sys.couplings[0, 3] == pytest.approx(100 / 8)


def test_generate_rejects_unknown_geometry():
    with pytest.raises(ValueError, match="geometry"):
        generate_spin_system("lattice", 3, 100)


def factorial_binomial(n, k):
    return math.factorial(n) // (math.factorial(k) * math.factorial(n - k))


def test_count_transitions_small():
    assert count_transitions(1) == 1
    assert count_transitions(2) == 4


@pytest.mark.parametrize("n", range(1, 20))
def test_count_transitions_matches_factorial_oracle(n):
    assert count_transitions(n) == factorial_binomial(2 * n, n + 1)


def test_count_transitions_successive_ratio_closed_form():
    # C(2n+2, n+2) / C(2n, n+1) = 2(n+1)(2n+1) / (n(n+2)): 4 at n=1, minimum at n=3, then rises to 4
    for n in range(1, 80):
        ratio = count_transitions(n + 1) / count_transitions(n)
        assert ratio == pytest.approx(2 * (n + 1) * (2 * n + 1) / (n * (n + 2)), rel=1e-12)
    ratios = [count_transitions(n + 1) / count_transitions(n) for n in range(3, 80)]
    assert all(r < 4 for r in ratios)
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert 4 - ratios[-1] < 0.03


def test_count_transitions_exponent_approaches_2n():
    exponents = [math.log2(count_transitions(n)) / (2 * n) for n in range(1, 20)]
    assert all(b > a for a, b in zip(exponents, exponents[1:]))
    assert 0.9 < exponents[-1] < 1
