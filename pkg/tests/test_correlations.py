import numpy as np
import pytest

from mubell.correlations import (
    Correlation,
    PairIndex,
    all_pair_indices,
    check_no_signaling,
    compute_correlation,
    extract_two_setting,
    from_csv,
    from_json,
    mix,
    to_csv,
    to_json,
    white_noise,
)
from mubell.mubs import Basis, MubSet, rotate_mubs, standard_mubs
from mubell.quantum import (
    DimensionError,
    TrialSeed,
    max_entangled_state,
    sample_haar_unitary,
)

S2 = 1 / np.sqrt(2)


def pauli_triple_bases():
    """Eigenbases of the three Pauli observables, +1 eigenvector first."""
    sx = Basis(2, np.array([[S2, S2], [S2, -S2]], dtype=complex))
    sy = Basis(2, np.array([[S2, 1j * S2], [S2, -1j * S2]], dtype=complex))
    sz = Basis(2, np.eye(2, dtype=complex))
    return MubSet(2, (sx, sy, sz))


def rotated_pauli_bases(t):
    """The same triple conjugated by the real rotation R(t)."""
    r = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    rotated = tuple(Basis(2, (r @ b.vectors.T).T) for b in pauli_triple_bases().bases)
    return MubSet(2, rotated)


def rotated_pauli_table(t):
    """The 3x3-block probability table for the rotated-triple experiment."""
    c, s = np.cos(2 * t), np.sin(2 * t)
    eq = np.array([[1 + c, 1 - c], [1 - c, 1 + c]]) / 4
    pl = np.array([[1 + s, 1 - s], [1 - s, 1 + s]]) / 4
    mi = np.array([[1 - s, 1 + s], [1 + s, 1 - s]]) / 4
    fl = np.full((2, 2), 0.25)
    anti = np.array([[0.0, 0.5], [0.5, 0.0]])
    blocks = [[eq, fl, pl], [fl, anti, fl], [mi, fl, eq]]
    p = np.empty((3, 3, 2, 2))
    for x in range(3):
        for y in range(3):
            p[x, y] = blocks[x][y]
    return p


class TestRotatedTripleGolden:
    @pytest.mark.parametrize("t", [0.0, np.pi / 8, 0.3])
    def test_full_table(self, t):
        corr = compute_correlation(
            max_entangled_state(2), pauli_triple_bases(), rotated_pauli_bases(t)
        )
        np.testing.assert_allclose(corr.p, rotated_pauli_table(t), atol=1e-12)

    def test_t_zero_block(self):
        corr = compute_correlation(
            max_entangled_state(2), pauli_triple_bases(), rotated_pauli_bases(0.0)
        )
        np.testing.assert_allclose(corr.p[0, 0], [[0.5, 0], [0, 0.5]], atol=1e-12)

    @pytest.mark.parametrize("t", [0.0, np.pi / 8, 0.3])
    def test_extractions(self, t):
        corr = compute_correlation(
            max_entangled_state(2), pauli_triple_bases(), rotated_pauli_bases(t)
        )
        c, s = np.cos(2 * t), np.sin(2 * t)
        eq = np.array([[1 + c, 1 - c], [1 - c, 1 + c]]) / 4
        pl = np.array([[1 + s, 1 - s], [1 - s, 1 + s]]) / 4
        fl = np.full((2, 2), 0.25)
        anti = np.array([[0.0, 0.5], [0.5, 0.0]])

        def combine(blocks):
            p = np.empty((2, 2, 2, 2))
            for x in range(2):
                for y in range(2):
                    p[x, y] = blocks[x][y]
            return p

        first = extract_two_setting(corr, PairIndex(0, 1, 0, 1))
        np.testing.assert_allclose(first.p, combine([[eq, fl], [fl, anti]]), atol=1e-12)
        second = extract_two_setting(corr, PairIndex(0, 1, 0, 2))
        np.testing.assert_allclose(second.p, combine([[eq, pl], [fl, fl]]), atol=1e-12)
        third = extract_two_setting(corr, PairIndex(0, 1, 1, 2))
        np.testing.assert_allclose(third.p, combine([[fl, pl], [anti, fl]]), atol=1e-12)


class TestComputeCorrelation:
    def test_aligned_computational_bases(self):
        for d in (2, 3, 5):
            state = max_entangled_state(d)
            mubs = standard_mubs(d).take(2)
            corr = compute_correlation(state, mubs, mubs)
            np.testing.assert_allclose(corr.p[0, 0], np.eye(d) / d, atol=1e-12)

    def test_rotated_passes_invariants(self):
        state = max_entangled_state(3)
        ref = standard_mubs(3).take(3)
        for trial in range(20):
            seed = TrialSeed(17, trial)
            alice = rotate_mubs(ref, sample_haar_unitary(3, seed, 0))
            bob = rotate_mubs(ref, sample_haar_unitary(3, seed, 1))
            corr = compute_correlation(state, alice, bob)
            corr.validate(1e-9)

    def test_dense_oracle_agreement(self):
        # independent evaluation through explicit d^2 x d^2 density matrices
        d = 3
        state = max_entangled_state(d)
        ref = standard_mubs(d).take(2)
        seed = TrialSeed(23, 0)
        alice = rotate_mubs(ref, sample_haar_unitary(d, seed, 0))
        bob = rotate_mubs(ref, sample_haar_unitary(d, seed, 1))
        corr = compute_correlation(state, alice, bob)
        psi = np.zeros(d * d, dtype=complex)
        for j in range(d):
            psi[j * d + j] = state.coeffs[j]
        rho = np.outer(psi, psi.conj())
        for x in range(2):
            for y in range(2):
                for a in range(d):
                    for b in range(d):
                        ea = alice.bases[x].vectors[a]
                        fb = bob.bases[y].vectors[b]
                        proj = np.kron(np.outer(ea, ea.conj()), np.outer(fb, fb.conj()))
                        want = float(np.trace(rho @ proj).real)
                        assert corr.p[x, y, a, b] == pytest.approx(want, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            compute_correlation(max_entangled_state(2), standard_mubs(3), standard_mubs(3))


class TestNoSignaling:
    def test_white_noise_passes(self):
        ok, dev = check_no_signaling(white_noise(2, 2, 3))
        assert ok and dev == 0.0

    def test_quantum_passes(self):
        state = max_entangled_state(4)
        ref = standard_mubs(4).take(2)
        seed = TrialSeed(31, 5)
        corr = compute_correlation(
            state,
            rotate_mubs(ref, sample_haar_unitary(4, seed, 0)),
            rotate_mubs(ref, sample_haar_unitary(4, seed, 1)),
        )
        ok, dev = check_no_signaling(corr, 1e-9)
        assert ok and dev < 1e-9

    def test_signaling_counterexample(self):
        k = 2
        p = np.full((2, 2, k, k), 1 / k**2)
        p[0, 0] = [[1.0, 0.0], [0.0, 0.0]]
        corr = Correlation(2, 2, k, p)
        ok, dev = check_no_signaling(corr, 1e-9)
        assert not ok and dev > 0.4


class TestExtraction:
    def test_identity_extraction(self):
        corr = white_noise(2, 2, 3)
        sub = extract_two_setting(corr, PairIndex(0, 1, 0, 1))
        np.testing.assert_array_equal(sub.p, corr.p)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            extract_two_setting(white_noise(2, 2, 2), PairIndex(0, 2, 0, 1))

    def test_commutes_with_mixing(self):
        state = max_entangled_state(3)
        ref = standard_mubs(3).take(3)
        seed = TrialSeed(41, 2)
        corr = compute_correlation(
            state,
            rotate_mubs(ref, sample_haar_unitary(3, seed, 0)),
            rotate_mubs(ref, sample_haar_unitary(3, seed, 1)),
        )
        wn_full = white_noise(3, 3, 3)
        wn_sub = white_noise(2, 2, 3)
        for v in (0.0, 0.4, 1.0, 1.7):
            for idx in all_pair_indices(3, 3):
                left = extract_two_setting(mix(corr, wn_full, v), idx)
                right = mix(extract_two_setting(corr, idx), wn_sub, v)
                np.testing.assert_allclose(left.p, right.p, atol=1e-12)


class TestPairIndices:
    def test_counts(self):
        assert len(all_pair_indices(2, 2)) == 1
        assert len(all_pair_indices(3, 3)) == 9
        assert len(all_pair_indices(4, 4)) == 36

    def test_lexicographic(self):
        idx = all_pair_indices(3, 3)
        assert idx[0] == PairIndex(0, 1, 0, 1)
        assert idx[1] == PairIndex(0, 1, 0, 2)
        assert idx[-1] == PairIndex(1, 2, 1, 2)

    def test_too_few_settings(self):
        with pytest.raises(ValueError):
            all_pair_indices(1, 3)


class TestWhiteNoiseAndMix:
    def test_white_noise_entries(self):
        wn = white_noise(2, 2, 3)
        assert wn.p.size == 36
        np.testing.assert_allclose(wn.p, 1 / 9)

    def test_mix_identity(self):
        corr = white_noise(2, 2, 2)
        p = np.zeros((2, 2, 2, 2))
        p[:, :, 0, 0] = 1.0
        q = Correlation(2, 2, 2, p)
        np.testing.assert_array_equal(mix(q, corr, 1.0).p, q.p)

    def test_mix_fixed_point(self):
        wn = white_noise(2, 2, 3)
        for v in (0.0, 0.5, 1.0, 2.5):
            np.testing.assert_allclose(mix(wn, wn, v).p, wn.p, atol=1e-15)

    def test_mix_shape_mismatch(self):
        with pytest.raises(ValueError):
            mix(white_noise(2, 2, 2), white_noise(2, 2, 3), 0.5)


class TestSerialization:
    def _sample(self):
        state = max_entangled_state(3)
        ref = standard_mubs(3).take(2)
        seed = TrialSeed(53, 1)
        return compute_correlation(
            state,
            rotate_mubs(ref, sample_haar_unitary(3, seed, 0)),
            rotate_mubs(ref, sample_haar_unitary(3, seed, 1)),
        )

    def test_csv_round_trip_lossless(self):
        corr = self._sample()
        back = from_csv(to_csv(corr))
        assert (back.mu, back.nu, back.k) == (corr.mu, corr.nu, corr.k)
        np.testing.assert_array_equal(back.p, corr.p)

    def test_csv_header(self):
        assert to_csv(white_noise(2, 2, 2)).splitlines()[0] == "x,y,a,b,p"

    def test_json_round_trip_lossless(self):
        corr = self._sample()
        back = from_json(to_json(corr))
        np.testing.assert_array_equal(back.p, corr.p)
