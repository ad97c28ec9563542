import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from qwcrypt.errors import ConservationError, DimensionError, ResourceError, ValidationError
from qwcrypt.fock import (
    FockState,
    FockSuperposition,
    Mixer,
    PhaseShift,
    ReckNetwork,
    beamsplitter_50_50,
    count_configs,
    fock_basis,
    haar_unitary,
    matrix_from_json,
    matrix_to_json,
    output_amplitude,
    output_distribution,
    permanent,
    permanents,
    reck_decompose,
    reck_recompose,
    sample_output,
    transfer_matrix,
    unitarity_error,
)

from conftest import naive_permanent, random_complex


# permanents


def test_permanent_small_cases():
    assert permanent(np.eye(2)) == 1
    assert permanent([[1, 2], [3, 4]]) == 10
    assert permanent(np.ones((3, 3))) == 6
    assert permanent(np.zeros((0, 0))) == 1


def test_permanent_rejects_non_square():
    with pytest.raises(DimensionError):
        permanent(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        permanents(np.ones((4, 2, 3)))


def test_permanent_random_4x4_matches_naive(rng):
    A = random_complex(rng, 4)
    assert abs(permanent(A) - naive_permanent(A)) < 1e-12


@pytest.mark.parametrize("n", range(1, 7))
def test_ryser_kernels_match_naive(rng, n):
    mats = np.array([random_complex(rng, n) for _ in range(100)])
    ref = np.array([naive_permanent(A) for A in mats])
    batched = permanents(mats)
    scalar = np.array([permanent(A) for A in mats])
    scale = np.maximum(np.abs(ref), 1.0)
    assert np.max(np.abs(batched - ref) / scale) < 1e-12
    assert np.max(np.abs(scalar - ref) / scale) < 1e-12


def test_permanent_n16_factorises_over_blocks(rng):
    A, B = haar_unitary(8, 1), haar_unitary(8, 2)
    full = np.zeros((16, 16), dtype=complex)
    full[:8, :8], full[8:, 8:] = A, B
    expected = permanent(A) * permanent(B)
    assert abs(permanent(full) - expected) < 1e-10 * abs(expected)
    # all-ones loses ~1e-9 to inclusion-exclusion cancellation at n = 16
    assert permanent(np.ones((16, 16))).real == pytest.approx(math.factorial(16), rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_permanent_invariant_under_row_and_column_permutation(n, seed):
    rng = np.random.default_rng(seed)
    A = random_complex(rng, n)
    P = A[rng.permutation(n)][:, rng.permutation(n)]
    assert abs(permanent(P) - permanent(A)) <= 1e-10 * max(1.0, abs(permanent(A)))
    assert abs(permanent(A.T) - permanent(A)) <= 1e-10 * max(1.0, abs(permanent(A)))


# unitaries and the Reck mesh


def test_haar_unitary_basic():
    U1 = haar_unitary(1, 3)
    assert U1.shape == (1, 1) and abs(abs(U1[0, 0]) - 1) < 1e-12
    assert np.array_equal(haar_unitary(4, 11), haar_unitary(4, 11))
    assert unitarity_error(haar_unitary(4, 11)) < 1e-12
    with pytest.raises(ValidationError):
        haar_unitary(0, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_haar_unitary_is_unitary(m, seed):
    assert unitarity_error(haar_unitary(m, seed)) < 1e-12


def test_haar_phase_statistics_are_uniform():
    # without the phase fix, QR leaves diag(U) biased; Haar gives E[U_00] = 0
    samples = np.array([haar_unitary(3, s)[0, 0] for s in range(4000)])
    assert abs(samples.mean()) < 4 * np.sqrt(1 / 3 / 4000)


def test_reck_identity_round_trip():
    net = reck_decompose(np.eye(4))
    assert np.max(np.abs(reck_recompose(net) - np.eye(4))) < 1e-10


def test_reck_real_rotation_gives_single_mixer():
    theta = 0.37
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    net = reck_decompose(R)
    assert len(net.mixers) == 1
    assert net.mixers[0].theta == pytest.approx(theta, abs=1e-12)
    assert np.max(np.abs(reck_recompose(net) - R)) < 1e-10


@pytest.mark.parametrize("m", [5, 6])
def test_reck_round_trip_haar(m):
    U = haar_unitary(m, 100 + m)
    net = reck_decompose(U)
    assert len(net.mixers) <= m * (m - 1) // 2
    assert np.max(np.abs(reck_recompose(net, m) - U)) < 1e-10


def test_reck_round_trip_many():
    for seed in range(50):
        m = 2 + seed % 7
        U = haar_unitary(m, seed)
        assert np.max(np.abs(reck_recompose(reck_decompose(U)) - U)) < 1e-10


def test_reck_recompose_elements():
    assert np.array_equal(reck_recompose(ReckNetwork(3, [])), np.eye(3))
    phi = 0.9
    M = reck_recompose(ReckNetwork(2, [PhaseShift(0, phi)]))
    assert np.allclose(M, np.diag([np.exp(1j * phi), 1]))
    with pytest.raises(ValidationError):
        reck_recompose(ReckNetwork(2, [Mixer(1, 0.1, 0.0)]))
    with pytest.raises(ValidationError):
        reck_recompose(ReckNetwork(2, [PhaseShift(2, 0.1)]))


def test_reck_rejects_non_unitary():
    with pytest.raises(ValidationError):
        reck_decompose(np.array([[1, 1], [0, 1]]))


# Fock basis


def test_fock_state_validation_and_parsing():
    s = FockState.parse("0110")
    assert s.occupations == (0, 1, 1, 0) and s.total_photons == 2 and s.n_modes == 4
    assert FockState.parse("0,12,0").occupations == (0, 12, 0)
    with pytest.raises(ValidationError):
        FockState((1, -1))
    with pytest.raises(ValidationError):
        FockState.parse("0a")


def test_fock_basis_order_and_size():
    basis = fock_basis(2, 2)
    assert [tuple(r) for r in basis] == [(0, 2), (1, 1), (2, 0)]
    for m, p in [(3, 2), (4, 3), (5, 0)]:
        b = fock_basis(m, p)
        assert len(b) == count_configs(m, p) == math.comb(m + p - 1, p)
        assert np.all(b.sum(axis=1) == p)
        assert [tuple(r) for r in b] == sorted(tuple(r) for r in b)


def test_fock_basis_cap():
    with pytest.raises(ResourceError, match="max_configs=10"):
        fock_basis(4, 3, max_configs=10)


# amplitudes and distributions


def test_output_amplitude_examples():
    bs = beamsplitter_50_50()
    assert output_amplitude(np.eye(2), (1, 0), (1, 0)) == pytest.approx(1)
    # Hong-Ou-Mandel: per([[1,1],[1,-1]])/2 = 0
    assert abs(output_amplitude(bs, (1, 1), (1, 1))) < 1e-15
    # rows (0, 0) of U, columns (0, 1): per([[1,1],[1,1]]/2) / sqrt(2!) = 1/sqrt2
    assert abs(output_amplitude(bs, (1, 1), (2, 0))) == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    with pytest.raises(ConservationError):
        output_amplitude(bs, (1, 1), (1, 0))


def test_output_distribution_examples():
    dist = output_distribution(np.eye(4), (0, 1, 1, 0))
    assert dist.probability((0, 1, 1, 0)) == pytest.approx(1.0, abs=1e-15)
    assert dist.total() == pytest.approx(1.0, abs=1e-15)

    hom = output_distribution(beamsplitter_50_50(), (1, 1))
    assert hom[(2, 0)] == pytest.approx(0.5, abs=1e-12)
    assert hom[(0, 2)] == pytest.approx(0.5, abs=1e-12)
    assert hom[(1, 1)] == pytest.approx(0.0, abs=1e-15)

    assert abs(output_distribution(haar_unitary(4, 2), (1, 0, 1, 0)).total() - 1) < 1e-10


def test_vacuum_input():
    dist = output_distribution(haar_unitary(3, 1), (0, 0, 0))
    assert dist.as_dict() == {(0, 0, 0): pytest.approx(1.0)}


def test_distribution_matches_output_amplitude(rng):
    U = haar_unitary(4, 9)
    inp = (2, 0, 1, 0)
    dist = output_distribution(U, inp)
    for occ, amp in zip(dist.states, dist.amplitudes):
        assert abs(amp - output_amplitude(U, inp, occ)) < 1e-12


@pytest.mark.parametrize("m", range(1, 9))
def test_single_photon_probabilities_are_matrix_entries(m):
    U = haar_unitary(m, 40 + m)
    for i in range(m):
        inp = [0] * m
        inp[i] = 1
        dist = output_distribution(U, inp).as_dict()
        for j in range(m):
            out = [0] * m
            out[j] = 1
            assert abs(dist[tuple(out)] - abs(U[j, i]) ** 2) < 1e-12


def test_output_distribution_cap():
    with pytest.raises(ResourceError, match="max_configs"):
        output_distribution(haar_unitary(6, 0), (1, 1, 1, 0, 0, 0), max_configs=50)


def test_sampling_examples():
    rng = np.random.default_rng(5)
    assert all(s == (1, 0) for s in sample_output(np.eye(2), (1, 0), rng, size=100))
    draws = sample_output(beamsplitter_50_50(), (1, 1), rng, size=10_000)
    assert draws.count((1, 1)) == 0
    a = sample_output(haar_unitary(3, 1), (1, 1, 0), np.random.default_rng(1), size=20)
    b = sample_output(haar_unitary(3, 1), (1, 1, 0), np.random.default_rng(1), size=20)
    assert a == b


def test_sampling_chi_squared():
    U = haar_unitary(3, 77)
    dist = output_distribution(U, (1, 1, 0))
    n = 100_000
    draws = dist.sample(np.random.default_rng(2024), n)
    observed = np.array([draws.count(tuple(int(x) for x in s)) for s in dist.states])
    expected = dist.probabilities * n
    assert chisquare(observed, expected * observed.sum() / expected.sum()).pvalue > 0.001


# superpositions and transfer matrices


def test_transfer_matrix_is_unitary():
    G = transfer_matrix(haar_unitary(4, 3), 3)
    assert np.max(np.abs(G.conj().T @ G - np.eye(len(G)))) < 1e-12
    assert not G.flags.writeable


def test_superposition_evolution_matches_distribution():
    U = haar_unitary(4, 8)
    state = FockSuperposition.basis_state((1, 0, 2, 0))
    out = state.evolve(U)
    assert abs(out.norm() - 1) < 1e-12
    assert np.allclose(out.amplitudes, output_distribution(U, (1, 0, 2, 0)).amplitudes, atol=1e-13)


def test_large_basis_evolution_path(monkeypatch):
    import qwcrypt.fock as fock

    U = haar_unitary(5, 2)
    state = FockSuperposition.basis_state((1, 1, 0, 1, 0))
    cached = state.evolve(U).amplitudes
    monkeypatch.setattr(fock, "TRANSFER_CACHE_LIMIT", 0)
    direct = state.evolve(U).amplitudes
    assert np.max(np.abs(cached - direct)) < 1e-13


def test_matrix_json_round_trip():
    U = haar_unitary(3, 4)
    assert np.array_equal(matrix_from_json(matrix_to_json(U)), U)
    assert FockState((0, 2, 1)).to_json() == [0, 2, 1]
    with pytest.raises(ValidationError):
        matrix_from_json([[1, 2], [3, 4]])
