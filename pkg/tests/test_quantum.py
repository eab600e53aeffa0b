import numpy as np
import pytest

from mubell.quantum import (
    STREAM_ALICE,
    STREAM_BOB,
    DimensionError,
    SchmidtState,
    TrialSeed,
    born_probability,
    is_unitary,
    max_entangled_state,
    partial_qutrit_state,
    sample_haar_unitary,
)


def dense_born_oracle(state, alice_vec, bob_vec):
    """Independent check: trace(rho E x F) with explicit d^2 x d^2 matrices."""
    d = state.d
    psi = np.zeros(d * d, dtype=complex)
    for j in range(d):
        psi[j * d + j] = state.coeffs[j]
    rho = np.outer(psi, psi.conj())
    e = np.outer(alice_vec, np.conj(alice_vec))
    f = np.outer(bob_vec, np.conj(bob_vec))
    return float(np.trace(rho @ np.kron(e, f)).real)


def haar_basis(d, rng):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, _ = np.linalg.qr(z)
    return q.T  # rows are orthonormal vectors


class TestMaxEntangledState:
    def test_d2(self):
        state = max_entangled_state(2)
        np.testing.assert_allclose(state.coeffs, [1 / np.sqrt(2)] * 2)

    def test_d3(self):
        state = max_entangled_state(3)
        np.testing.assert_allclose(state.coeffs, [1 / np.sqrt(3)] * 3)

    def test_d7(self):
        state = max_entangled_state(7)
        assert state.coeffs.shape == (7,)
        np.testing.assert_allclose(state.coeffs, 1 / np.sqrt(7))
        assert abs(np.sum(state.coeffs**2) - 1) < 1e-12

    def test_invalid_dimension(self):
        with pytest.raises(DimensionError):
            max_entangled_state(1)


class TestPartialQutritState:
    def test_alpha_zero_is_product(self):
        for beta in (0.0, 0.3, np.pi / 4):
            state = partial_qutrit_state(0.0, beta)
            np.testing.assert_allclose(state.coeffs, [1.0, 0.0, 0.0], atol=1e-15)

    def test_maximally_entangled_corner(self):
        state = partial_qutrit_state(np.arccos(1 / np.sqrt(3)), np.pi / 4)
        np.testing.assert_allclose(state.coeffs, 1 / np.sqrt(3), atol=1e-12)

    def test_pi_sixth(self):
        state = partial_qutrit_state(np.pi / 6, np.pi / 6)
        expected = [
            np.cos(np.pi / 6),
            np.sin(np.pi / 6) * np.cos(np.pi / 6),
            np.sin(np.pi / 6) * np.sin(np.pi / 6),
        ]
        np.testing.assert_allclose(state.coeffs, expected, atol=1e-12)
        assert abs(np.sum(state.coeffs**2) - 1) < 1e-12

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            partial_qutrit_state(1.5, 0.1)
        with pytest.raises(ValueError):
            partial_qutrit_state(0.1, 1.0)
        with pytest.raises(ValueError):
            partial_qutrit_state(-0.1, 0.1)


class TestBornProbability:
    def test_bell_state_computational(self):
        state = max_entangled_state(2)
        e0 = np.array([1, 0], dtype=complex)
        assert born_probability(state, e0, e0) == pytest.approx(0.5)

    def test_orthogonal_branches(self):
        for d in (2, 3, 5):
            state = max_entangled_state(d)
            e0 = np.eye(d, dtype=complex)[0]
            e1 = np.eye(d, dtype=complex)[1]
            assert born_probability(state, e0, e1) == pytest.approx(0.0, abs=1e-15)

    def test_phi3_against_dense_oracle(self):
        state = max_entangled_state(3)
        alice = np.array([1, 0, 0], dtype=complex)
        bob = np.ones(3, dtype=complex) / np.sqrt(3)
        assert born_probability(state, alice, bob) == pytest.approx(1 / 9, abs=1e-14)
        assert dense_born_oracle(state, alice, bob) == pytest.approx(1 / 9, abs=1e-14)

    def test_random_vectors_match_dense_oracle(self):
        rng = np.random.default_rng(42)
        for d in (2, 3, 4):
            raw = rng.random(d)
            state = SchmidtState(d, raw / np.linalg.norm(raw))
            for _ in range(10):
                a = haar_basis(d, rng)[0]
                b = haar_basis(d, rng)[0]
                got = born_probability(state, a, b)
                want = dense_born_oracle(state, a, b)
                assert got == pytest.approx(want, abs=1e-12)

    def test_dimension_mismatch(self):
        state = max_entangled_state(2)
        with pytest.raises(DimensionError):
            born_probability(state, np.ones(3) / np.sqrt(3), np.array([1, 0]))

    def test_norm_check(self):
        state = max_entangled_state(2)
        with pytest.raises(ValueError):
            born_probability(state, np.array([1.0, 1.0]), np.array([1.0, 0.0]))

    def test_completeness_over_bases(self):
        rng = np.random.default_rng(7)
        for d in (2, 3, 5):
            raw = rng.random(d)
            state = SchmidtState(d, raw / np.linalg.norm(raw))
            alice = haar_basis(d, rng)
            bob = haar_basis(d, rng)
            total = sum(
                born_probability(state, alice[a], bob[b])
                for a in range(d)
                for b in range(d)
            )
            assert total == pytest.approx(1.0, abs=1e-10)

    def test_global_phase_invariance(self):
        rng = np.random.default_rng(3)
        state = max_entangled_state(3)
        a = haar_basis(3, rng)[0]
        b = haar_basis(3, rng)[0]
        base = born_probability(state, a, b)
        for phase in (1j, np.exp(0.7j), -1.0):
            assert born_probability(state, phase * a, b) == pytest.approx(base, abs=1e-12)
            assert born_probability(state, a, phase * b) == pytest.approx(base, abs=1e-12)


class TestSchmidtStateValidation:
    def test_negative_coefficient(self):
        with pytest.raises(ValueError):
            SchmidtState(2, np.array([1.2, -0.2]))

    def test_unnormalized(self):
        with pytest.raises(ValueError):
            SchmidtState(2, np.array([1.0, 1.0]))


class TestHaarSampling:
    def test_d1_phase(self):
        u = sample_haar_unitary(1, TrialSeed(0, 0), STREAM_ALICE)
        assert abs(abs(u[0, 0]) - 1.0) < 1e-12

    def test_unitarity(self):
        for d in (2, 3, 5, 7):
            u = sample_haar_unitary(d, TrialSeed(123, 4), STREAM_BOB)
            assert is_unitary(u, 1e-10)

    def test_deterministic_and_stream_separated(self):
        seed = TrialSeed(99, 7)
        u1 = sample_haar_unitary(3, seed, STREAM_ALICE)
        u2 = sample_haar_unitary(3, seed, STREAM_ALICE)
        v = sample_haar_unitary(3, seed, STREAM_BOB)
        assert np.array_equal(u1, u2)
        assert not np.allclose(u1, v)

    def test_trials_independent(self):
        u1 = sample_haar_unitary(3, TrialSeed(99, 0), STREAM_ALICE)
        u2 = sample_haar_unitary(3, TrialSeed(99, 1), STREAM_ALICE)
        assert not np.allclose(u1, u2)

    def test_first_moment_statistics(self):
        # |U_ij|^2 is Beta(1, d-1): mean 1/d, variance (d-1)/(d^2 (d+1)).
        # For d=3 the variance is 1/18; every entry must sit within 5 SE.
        d = 3
        n = 10_000
        acc = np.zeros((d, d))
        for t in range(n):
            u = sample_haar_unitary(d, TrialSeed(2024, t), STREAM_ALICE)
            acc += np.abs(u) ** 2
        mean = acc / n
        var = (d - 1) / (d**2 * (d + 1))
        assert var == pytest.approx(1 / 18)
        se = np.sqrt(var / n)
        assert np.max(np.abs(mean - 1 / d)) < 5 * se

    def test_invalid_dimension(self):
        with pytest.raises(DimensionError):
            sample_haar_unitary(0, TrialSeed(0, 0), 0)
