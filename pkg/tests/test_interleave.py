import numpy as np
import pytest

import concat_ira as ci
from concat_ira.interleave import InterleaverInfeasible, PermutationFileError


class TestRandomPermutation:
    def test_one_by_one_is_identity(self):
        perm = ci.random_permutation(1, 1, 0)
        assert perm.forward.tolist() == [0]

    def test_deterministic_in_seed(self):
        a = ci.random_permutation(4, 6, 9)
        b = ci.random_permutation(4, 6, 9)
        assert np.array_equal(a.forward, b.forward)

    def test_uniform_over_two_by_two(self):
        """All 24 bijections of a 2x2 block occur near-equally over 1e5 seeds."""
        counts: dict[tuple, int] = {}
        for seed in range(100_000):
            key = tuple(ci.random_permutation(2, 2, seed).forward.tolist())
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 24
        expected = 100_000 / 24
        sd = np.sqrt(100_000 * (1 / 24) * (23 / 24))
        for got in counts.values():
            assert abs(got - expected) < 3 * sd

    def test_forward_is_readonly(self):
        perm = ci.random_permutation(3, 3, 0)
        with pytest.raises(ValueError):
            perm.forward[0] = 5

    def test_non_bijection_rejected(self):
        with pytest.raises(ValueError, match="bijection"):
            ci.BlockPermutation(K=2, N=2, forward=np.array([0, 0, 1, 2]), seed=0)


class TestApplyInvert:
    def test_identity_leaves_block_alone(self):
        perm = ci.BlockPermutation(K=2, N=3, forward=np.arange(6), seed=0)
        block = np.arange(6).reshape(2, 3)
        assert np.array_equal(perm.apply(block), block)

    def test_apply_then_inverse_restores(self):
        rng = np.random.default_rng(1)
        perm = ci.random_permutation(5, 7, 3)
        block = rng.normal(size=(5, 7))
        assert np.array_equal(perm.invert().apply(perm.apply(block)), block)

    def test_non_contiguous_input(self):
        # a transposed / sliced view must permute by value, not by memory order
        perm = ci.random_permutation(4, 4, 2)
        base = np.arange(32).reshape(4, 8)
        view = base[:, ::2]
        expect = perm.apply(view.copy())
        assert np.array_equal(perm.apply(view), expect)

    def test_moves_by_flat_position(self):
        perm = ci.BlockPermutation(K=1, N=3, forward=np.array([2, 0, 1]), seed=0)
        out = perm.apply(np.array([[10, 20, 30]]))
        assert out.tolist() == [[20, 30, 10]]

    def test_shape_mismatch_rejected(self):
        perm = ci.random_permutation(2, 3, 0)
        with pytest.raises(ValueError):
            perm.apply(np.zeros((3, 2)))


class TestCountBadMappings:
    def test_empty_sets_count_zero(self):
        perm = ci.random_permutation(4, 5, 0)
        sets = ci.SensitiveSets(frozenset(), frozenset())
        assert ci.count_bad_mappings(perm, sets).count == 0

    def test_identity_hand_worked(self):
        # K=N=2, identity: only (0,0) sits in sensitive column 0 and lands in
        # sensitive row 0; (1,0) lands in row 1 which is not sensitive
        perm = ci.BlockPermutation(K=2, N=2, forward=np.arange(4), seed=0)
        sets = ci.SensitiveSets(frozenset({0}), frozenset({0}))
        got = ci.count_bad_mappings(perm, sets)
        assert got.count == 1
        assert got.positions == [(0, 0)]

    def test_out_of_range_sets_rejected(self):
        perm = ci.random_permutation(2, 2, 0)
        with pytest.raises(ValueError):
            ci.count_bad_mappings(perm, ci.SensitiveSets(frozenset({5}), frozenset()))
        with pytest.raises(ValueError):
            ci.count_bad_mappings(perm, ci.SensitiveSets(frozenset(), frozenset({1, 9})))


class TestDesign:
    def test_empty_sets_returns_unchanged(self):
        perm = ci.random_permutation(4, 5, 1)
        sets = ci.SensitiveSets(frozenset(), frozenset())
        out = ci.design(perm, sets, np.random.default_rng(0))
        assert np.array_equal(out.forward, perm.forward)
        assert out.repairs == 0

    def test_counting_bound_infeasible(self):
        # K=N=4 with all 4 columns and 3 rows sensitive: 16 > (4-3)*4 = 4
        perm = ci.random_permutation(4, 4, 2)
        sets = ci.SensitiveSets(frozenset({0, 1, 2, 3}), frozenset({1, 2, 3}))
        with pytest.raises(InterleaverInfeasible) as exc:
            ci.design(perm, sets, np.random.default_rng(0))
        assert exc.value.reason == "counting_bound"

    def test_paper_shape_top_ten(self, paper_codes_with_histograms):
        outer, inner, hist_row, hist_col = paper_codes_with_histograms
        perm0 = ci.random_permutation(128, 181, 7)
        sets = ci.SensitiveSets(
            frozenset(ci.select_sensitive(hist_row, 10)),
            frozenset(ci.select_sensitive(hist_col, 10, restrict_below=128)),
        )
        before = ci.count_bad_mappings(perm0, sets).count
        designed = ci.design(perm0, sets, np.random.default_rng(3), validate_each_swap=True)
        assert ci.count_bad_mappings(designed, sets).count == 0
        assert designed.repairs == before  # each swap fixed exactly one offender
        assert np.array_equal(np.sort(designed.forward), np.arange(128 * 181))

    def test_designed_indicator_mask_property(self, paper_codes_with_histograms):
        outer, inner, hist_row, hist_col = paper_codes_with_histograms
        perm0 = ci.random_permutation(128, 181, 7)
        sets = ci.SensitiveSets(
            frozenset(ci.select_sensitive(hist_row, 8)),
            frozenset(ci.select_sensitive(hist_col, 8, restrict_below=128)),
        )
        designed = ci.design(perm0, sets, np.random.default_rng(4))
        lit = np.zeros((128, 181))
        lit[:, sorted(sets.row_code_nodes)] = 1.0
        moved = designed.apply(lit)
        assert not moved[sorted(sets.col_code_nodes), :].any()

    def test_deterministic_given_seeds(self, paper_codes_with_histograms):
        _, _, hist_row, hist_col = paper_codes_with_histograms
        perm0 = ci.random_permutation(128, 181, 7)
        sets = ci.SensitiveSets(
            frozenset(ci.select_sensitive(hist_row, 6)),
            frozenset(ci.select_sensitive(hist_col, 6, restrict_below=128)),
        )
        a = ci.design(perm0, sets, np.random.default_rng(5))
        b = ci.design(perm0, sets, np.random.default_rng(5))
        assert np.array_equal(a.forward, b.forward)


class TestEscalateDesign:
    def test_returns_last_feasible_level(self):
        # counting bound: 6t <= (6 - t) * 8 fails first at t = 4
        k, n = 6, 8
        hist_row = ci.SensitivityHistogram(tuple(range(n, 0, -1)), runs=n)
        hist_col = ci.SensitivityHistogram(tuple(range(n, 0, -1)), runs=n)
        perm0 = ci.random_permutation(k, n, 1)
        out = ci.escalate_design(hist_row, hist_col, perm0, np.random.default_rng(0))
        assert out.design_t == 3
        # cross-check: level 3 designs fine, level 4 is infeasible
        sets4 = ci.SensitiveSets(
            frozenset(ci.select_sensitive(hist_row, 4)),
            frozenset(ci.select_sensitive(hist_col, 4, restrict_below=k)),
        )
        with pytest.raises(InterleaverInfeasible):
            ci.design(perm0, sets4, np.random.default_rng(0))

    def test_result_has_zero_bad_mappings(self, paper_codes_with_histograms):
        _, _, hist_row, hist_col = paper_codes_with_histograms
        perm0 = ci.random_permutation(128, 181, 7)
        out = ci.escalate_design(hist_row, hist_col, perm0, np.random.default_rng(1))
        assert out.design_t >= 1
        assert out.sets is not None
        assert ci.count_bad_mappings(out, out.sets).count == 0

    def test_zero_histograms_still_return_a_permutation(self):
        k, n = 4, 6
        hist = ci.SensitivityHistogram((0,) * n, runs=n)
        perm0 = ci.random_permutation(k, n, 2)
        out = ci.escalate_design(hist, hist, perm0, np.random.default_rng(2))
        assert np.array_equal(np.sort(out.forward), np.arange(k * n))


class TestPermutationFile:
    def test_round_trip(self, tmp_path):
        perm = ci.random_permutation(3, 5, 11)
        path = tmp_path / "pi.perm"
        ci.save_permutation(perm, path)
        again = ci.load_permutation(path)
        assert np.array_equal(again.forward, perm.forward)
        assert (again.K, again.N, again.seed, again.design_t) == (3, 5, 11, 0)

    def test_header_line(self, tmp_path):
        perm = ci.random_permutation(2, 2, 3)
        path = tmp_path / "pi.perm"
        ci.save_permutation(perm, path)
        assert path.read_text().splitlines()[0] == "2 2 3 0"

    def test_corrupt_mapping_rejected(self, tmp_path):
        perm = ci.random_permutation(2, 2, 3)
        path = tmp_path / "pi.perm"
        ci.save_permutation(perm, path)
        lines = path.read_text().splitlines()
        lines[1] = "0 0"
        lines[2] = "1 0"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(PermutationFileError):
            ci.load_permutation(path)

    def test_wrong_line_count_rejected(self, tmp_path):
        path = tmp_path / "pi.perm"
        path.write_text("2 2 0 0\n0 0\n1 1\n")
        with pytest.raises(PermutationFileError, match="mapping lines"):
            ci.load_permutation(path)
