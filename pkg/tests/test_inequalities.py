from itertools import permutations, product

import numpy as np
import pytest

from mubell.correlations import Correlation, compute_correlation, mix, white_noise
from mubell.inequalities import (
    BellInequality,
    RelabelingSizeError,
    cglmp,
    chsh,
    evaluate,
    family_union,
    family_values,
    ineq_from_json,
    ineq_to_json,
    lift_outcomes,
    local_bound_brute_force,
    max_over_family,
    relabelings,
)
from mubell.mubs import Basis, MubSet
from mubell.quantum import max_entangled_state


def exhaustive_local_max(ineq):
    """Independent oracle: plain enumeration of every deterministic strategy."""
    best = -np.inf
    for amap in product(range(ineq.k), repeat=ineq.mu):
        for bmap in product(range(ineq.k), repeat=ineq.nu):
            val = sum(
                ineq.beta[amap[x], bmap[y], x, y]
                for x in range(ineq.mu)
                for y in range(ineq.nu)
            )
            best = max(best, val)
    return best


def raw_relabeling_family(ineq):
    """Independent oracle: apply every raw relabeling, deduplicate."""
    k, mu, nu = ineq.k, ineq.mu, ineq.nu
    seen = {}
    for pa in permutations(range(mu)):
        for pb in permutations(range(nu)):
            for aouts in product(permutations(range(k)), repeat=mu):
                for bouts in product(permutations(range(k)), repeat=nu):
                    for swap in (False, True) if mu == nu else (False,):
                        nb = np.empty_like(ineq.beta)
                        for a in range(k):
                            for b in range(k):
                                for x in range(mu):
                                    for y in range(nu):
                                        nb[aouts[x][a], bouts[y][b], pa[x], pb[y]] = (
                                            ineq.beta[a, b, x, y]
                                        )
                        if swap:
                            nb = np.transpose(nb, (1, 0, 3, 2)).copy()
                        seen[np.round(nb, 12).tobytes()] = nb
    return seen


def pr_box():
    """No-signaling box P(a,b|x,y) = [a xor b = xy]/2."""
    p = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    if (a + b) % 2 == x * y:
                        p[x, y, a, b] = 0.5
    return Correlation(2, 2, 2, p)


def real_qubit_basis(phi):
    c, s = np.cos(phi), np.sin(phi)
    return Basis(2, np.array([[c, s], [-s, c]], dtype=complex))


def tsirelson_correlation():
    """Measurement angles saturating the two-setting quantum maximum 2*sqrt(2)."""
    alice = MubSet(2, (real_qubit_basis(0.0), real_qubit_basis(np.pi / 4)))
    bob = MubSet(2, (real_qubit_basis(np.pi / 8), real_qubit_basis(-np.pi / 8)))
    return compute_correlation(max_entangled_state(2), alice, bob)


class TestChsh:
    def test_white_noise_value(self):
        assert evaluate(chsh(), white_noise(2, 2, 2)) == pytest.approx(0.0, abs=1e-15)

    def test_local_bound_by_enumeration(self):
        assert exhaustive_local_max(chsh()) == pytest.approx(2.0)
        assert local_bound_brute_force(2, 2, 2, chsh().beta) == pytest.approx(2.0)

    def test_pr_box_reaches_four(self):
        assert evaluate(chsh(), pr_box()) == pytest.approx(4.0)

    def test_tsirelson_value(self):
        val, _ = max_over_family(relabelings(chsh()), tsirelson_correlation())
        assert val == pytest.approx(2 * np.sqrt(2), abs=1e-9)


class TestCglmp:
    def test_k2_is_chsh_with_bob_inputs_swapped(self):
        got = cglmp(2).beta
        swapped = chsh().beta[:, :, :, ::-1]
        np.testing.assert_allclose(got, swapped, atol=1e-15)

    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_white_noise_zero(self, k):
        assert evaluate(cglmp(k), white_noise(2, 2, k)) == pytest.approx(0.0, abs=1e-13)

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 7])
    def test_white_noise_zero_exact(self, k):
        assert abs(evaluate(cglmp(k), white_noise(2, 2, k))) <= 1e-12

    def test_k3_local_bound_81_strategies(self):
        assert exhaustive_local_max(cglmp(3)) == pytest.approx(2.0)

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 7])
    def test_local_bound_best_response(self, k):
        assert local_bound_brute_force(2, 2, k, cglmp(k).beta) == pytest.approx(2.0)

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            cglmp(1)


class TestEvaluate:
    def test_uniform_weights(self):
        ineq = cglmp(3)
        wn = white_noise(2, 2, 3)
        assert evaluate(ineq, wn) == pytest.approx(float(ineq.beta.sum()) / 9, abs=1e-13)

    def test_all_zero_strategy(self):
        p = np.zeros((2, 2, 2, 2))
        p[:, :, 0, 0] = 1.0
        assert evaluate(chsh(), Correlation(2, 2, 2, p)) == pytest.approx(2.0)

    def test_linearity(self):
        ineq = cglmp(3)
        p = pr_box()
        rng = np.random.default_rng(0)
        raw = rng.random((2, 2, 3, 3))
        raw /= raw.sum(axis=(2, 3), keepdims=True)
        q = Correlation(2, 2, 3, raw)
        wn = white_noise(2, 2, 3)
        for v in (0.2, 0.9, 1.4):
            left = evaluate(ineq, mix(q, wn, v))
            right = v * evaluate(ineq, q) + (1 - v) * evaluate(ineq, wn)
            assert left == pytest.approx(right, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            evaluate(chsh(), white_noise(2, 2, 3))


class TestRelabelings:
    def test_chsh_family_matches_raw_enumeration(self):
        fam = relabelings(chsh())
        raw = raw_relabeling_family(chsh())
        assert len(fam) == 8
        assert {m.canonical_key() for m in fam.members} == set(raw.keys())

    def test_cglmp3_family_matches_raw_enumeration(self):
        fam = relabelings(cglmp(3))
        raw = raw_relabeling_family(cglmp(3))
        assert len(fam) == len(raw) == 432
        assert {m.canonical_key() for m in fam.members} == set(raw.keys())

    def test_identity_is_member(self):
        fam = relabelings(cglmp(3))
        assert cglmp(3).canonical_key() in {m.canonical_key() for m in fam.members}

    def test_members_share_local_bound(self):
        for fam in (relabelings(chsh()), relabelings(cglmp(3)),
                    relabelings(lift_outcomes(chsh(), 3))):
            for member in fam.members:
                bound = local_bound_brute_force(
                    member.mu, member.nu, member.k, member.beta
                )
                assert bound == pytest.approx(member.local_bound)

    def test_family_closed_under_relabeling(self):
        fam = relabelings(cglmp(3))
        keys = {m.canonical_key() for m in fam.members}
        # applying one fixed relabeling to every member permutes the family
        def bob_input_swap(beta):
            return beta[:, :, :, ::-1].copy()

        def alice_output_cycle(beta):
            out = beta.copy()
            for a in range(3):
                out[(a + 1) % 3, :, 0, :] = beta[a, :, 0, :]
            return out

        for transform in (bob_input_swap, alice_output_cycle):
            mapped = {
                np.round(transform(m.beta), 12).tobytes() for m in fam.members
            }
            assert mapped == keys

    def test_size_refusal_for_k5(self):
        with pytest.raises(RelabelingSizeError):
            relabelings(cglmp(5))


class TestLifting:
    def test_lift_to_k2_is_identity(self):
        lifted = lift_outcomes(chsh(), 2)
        np.testing.assert_array_equal(lifted.beta, chsh().beta)

    def test_lifted_white_noise_value(self):
        # direct summation: merged coefficient classes of sizes 1,2,2,4 give
        # (k-2)^2 per block and the (-1)^xy signs leave 2(k-2)^2 / k^2
        lifted = lift_outcomes(chsh(), 3)
        assert evaluate(lifted, white_noise(2, 2, 3)) == pytest.approx(2 / 9, abs=1e-13)
        for k in (2, 4, 5):
            got = evaluate(lift_outcomes(chsh(), k), white_noise(2, 2, k))
            assert got == pytest.approx(2 * (k - 2) ** 2 / k**2, abs=1e-13)

    def test_lifted_bound_unchanged(self):
        lifted = lift_outcomes(chsh(), 3)
        assert exhaustive_local_max(lifted) == pytest.approx(2.0)
        assert lifted.local_bound == 2.0

    def test_lifted_family_size(self):
        assert len(relabelings(lift_outcomes(chsh(), 3))) == 324


class TestMaxOverFamily:
    def test_white_noise_zero(self):
        val, _ = max_over_family(relabelings(chsh()), white_noise(2, 2, 2))
        assert val == pytest.approx(0.0, abs=1e-13)

    def test_monotone_vs_members(self):
        fam = relabelings(cglmp(3))
        corr = white_noise(2, 2, 3)
        rng = np.random.default_rng(5)
        raw = rng.random((2, 2, 3, 3))
        raw /= raw.sum(axis=(2, 3), keepdims=True)
        corr = Correlation(2, 2, 3, raw)
        val, arg = max_over_family(fam, corr)
        vals = family_values(fam, corr)
        assert val >= vals.max() - 1e-15
        assert val == pytest.approx(vals[arg])

    def test_tie_breaks_to_lowest_index(self):
        fam = relabelings(chsh())
        # white noise gives 0 for every member; argmax must be index 0
        _, arg = max_over_family(fam, white_noise(2, 2, 2))
        assert arg == 0


def test_family_union_dedupes():
    fam = relabelings(chsh())
    union = family_union(fam, fam)
    assert len(union) == len(fam)


def test_json_round_trip():
    ineq = cglmp(3)
    back = ineq_from_json(ineq_to_json(ineq))
    assert (back.mu, back.nu, back.k) == (2, 2, 3)
    assert back.local_bound == 2.0
    np.testing.assert_array_equal(back.beta, ineq.beta)


def test_validation_rejects_bad_shape():
    with pytest.raises(ValueError):
        BellInequality(2, 2, 2, np.zeros((2, 2, 2, 3)), 2.0)
