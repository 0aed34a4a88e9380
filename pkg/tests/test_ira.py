import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import concat_ira as ci
from concat_ira.ira import ConstructionError

from conftest import TOY_ACE
from oracles import dense_syndrome


class TestBuildH2:
    def test_single_column(self):
        m = ci.build_h2(1)
        assert m.col_support == ((0,),)

    def test_three_by_three_structure(self):
        m = ci.build_h2(3)
        assert m.col_support == ((0, 1), (1, 2), (2,))

    def test_edge_count_53(self):
        assert ci.build_h2(53).n_edges == 2 * 53 - 1 == 105

    def test_row_weights(self):
        m = ci.build_h2(6)
        weights = [len(r) for r in m.row_support]
        assert weights == [1, 2, 2, 2, 2, 2]


class TestDefaultDegreeSpec:
    def test_paper_shape_mix(self):
        spec = ci.default_degree_spec(128, 53, 10)
        degrees = spec.h1_column_degrees
        assert sum(degrees) == 425 == 53 * 10 - 105
        assert degrees.count(4) == 41 and degrees.count(3) == 87

    def test_overfull_budget_rejected(self):
        # budget 20 - 3 = 17 needs u = 5 degree-4 columns but only K = 4 exist
        with pytest.raises(ConstructionError):
            ci.default_degree_spec(4, 2, 10)

    def test_exact_budget_gives_all_threes(self):
        # M * cd - (2M - 1) == 3K: K=5, M=8, cd=4 -> 32-15=17... pick exact case
        # M=7, cd=4 -> 28-13=15 = 3*5
        spec = ci.default_degree_spec(5, 7, 4)
        assert set(spec.h1_column_degrees) == {3}

    def test_underfull_budget_rejected(self):
        with pytest.raises(ConstructionError):
            ci.default_degree_spec(10, 3, 4)  # budget 7 < 30

    def test_degree_below_three_rejected(self):
        with pytest.raises(ValueError):
            ci.DegreeSpec((3, 2, 3), 10)


class TestBuildH1:
    def test_paper_row_budget(self, paper_outer):
        h = paper_outer.H
        h1_row_weights = [sum(1 for c in h.row_support[r] if c < 128) for r in range(53)]
        assert h1_row_weights[0] == 9
        assert all(w == 8 for w in h1_row_weights[1:])
        assert sum(h1_row_weights) == 425

    def test_eta_zero_accepts_any_budgeted_placement(self):
        code = ci.build_code(
            6, 10, check_degree=7, ace=ci.AceParams(2, 0, 10), seed=0,
            screen_low_weight=False,
        )
        assert all(len(r) == 7 for r in code.H.row_support)

    def test_unsatisfiable_eta_fails(self):
        with pytest.raises(ConstructionError, match="ACE"):
            ci.build_code(
                8, 12, check_degree=8,
                ace=ci.AceParams(d_ace=4, eta=10**6, max_resample=5),
                seed=0, max_restarts=2,
            )

    def test_deterministic_in_seed(self):
        a = ci.build_code(16, 24, check_degree=8, ace=TOY_ACE, seed=3, screen_low_weight=False)
        b = ci.build_code(16, 24, check_degree=8, ace=TOY_ACE, seed=3, screen_low_weight=False)
        assert a.H.row_support == b.H.row_support


class TestAceCheck:
    def test_acyclic_passes_with_no_cycle(self, tree_matrix):
        g = ci.TannerGraph.from_matrix(tree_matrix)
        res = ci.ace_check(g, 0, d_ace=4, eta=100)
        assert res.passed and res.min_ace is None

    def test_four_cycle_of_degree_threes(self):
        # two variables sharing two checks, each with one extra check
        m = ci.SparseBinaryMatrix.from_cols(
            4, 2, [(0, 1, 2), (0, 1, 3)]
        )
        g = ci.TannerGraph.from_matrix(m)
        res = ci.ace_check(g, 0, d_ace=2, eta=3)
        assert res.min_ace == (3 - 2) + (3 - 2) == 2
        assert not res.passed
        assert ci.ace_check(g, 0, d_ace=2, eta=2).passed

    def test_degree_two_contributes_nothing(self):
        m = ci.SparseBinaryMatrix.from_cols(2, 2, [(0, 1), (0, 1)])
        g = ci.TannerGraph.from_matrix(m)
        assert ci.ace_check(g, 0, d_ace=2, eta=1).min_ace == 0


class TestEncode:
    def test_all_zero_source(self, paper_outer):
        cw = ci.encode(paper_outer, np.zeros(128, dtype=np.uint8))
        assert not cw.any()

    def test_hand_worked_toy_accumulator(self):
        # M=2, H1 rows {0}, {1} over K=2: s=(1,0) -> t=(1,0), p=(1,1)
        h = ci.SparseBinaryMatrix.from_rows(2, 4, [(0, 2), (1, 2, 3)])
        spec = ci.DegreeSpec((3,), 3)  # placeholder spec; invariants checked separately
        code = ci.IraCode(K=2, N=4, M=2, H=h, degree_spec=spec, ace=TOY_ACE, seed=0)
        cw = ci.encode(code, np.array([1, 0]))
        assert cw.tolist() == [1, 0, 1, 1]
        assert not ci.syndrome(h, cw).any()

    def test_syndrome_zero_on_random_sources(self, paper_outer):
        rng = np.random.default_rng(5)
        sources = rng.integers(0, 2, (200, 128), dtype=np.uint8)
        words = ci.encode_batch(paper_outer, sources)
        dense = paper_outer.H.to_dense().astype(np.int64)
        assert not ((words @ dense.T) % 2).any()

    def test_matches_dense_oracle(self, toy_outer):
        rng = np.random.default_rng(6)
        dense = toy_outer.H.to_dense()
        for _ in range(50):
            s = rng.integers(0, 2, 8, dtype=np.uint8)
            cw = ci.encode(toy_outer, s)
            assert not dense_syndrome(dense, cw).any()

    @given(st.integers(0, 2**32))
    @settings(max_examples=30, deadline=None)
    def test_gf2_linearity(self, toy_outer, seed):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 2, 8, dtype=np.uint8)
        b = rng.integers(0, 2, 8, dtype=np.uint8)
        assert np.array_equal(
            ci.encode(toy_outer, a ^ b),
            ci.encode(toy_outer, a) ^ ci.encode(toy_outer, b),
        )

    def test_wrong_length_rejected(self, toy_outer):
        with pytest.raises(ValueError):
            ci.encode(toy_outer, np.zeros(9, dtype=np.uint8))


class TestLowWeightScreen:
    def brute_force_has_le4(self, h):
        # independent oracle: try every combination of up to 4 columns
        from itertools import combinations

        dense = h.to_dense().astype(np.int64)
        for w in (2, 3, 4):
            for cols in combinations(range(h.n_cols), w):
                if not dense[:, cols].sum(axis=1).__mod__(2).any():
                    return True
        return False

    def test_checker_matches_brute_force(self):
        rng = np.random.default_rng(0)
        disagreements = 0
        for _ in range(40):
            n_rows = int(rng.integers(3, 7))
            n_cols = int(rng.integers(2, 9))
            cols = []
            for _ in range(n_cols):
                deg = int(rng.integers(1, n_rows + 1))
                cols.append(sorted(rng.choice(n_rows, size=deg, replace=False)))
            m = ci.SparseBinaryMatrix.from_cols(n_rows, n_cols, cols)
            if ci.has_codeword_of_weight_le4(m) != self.brute_force_has_le4(m):
                disagreements += 1
        assert disagreements == 0

    def test_screened_code_is_clean(self, paper_outer):
        assert not ci.has_codeword_of_weight_le4(paper_outer.H)

    def test_duplicate_column_detected(self):
        m = ci.SparseBinaryMatrix.from_cols(3, 2, [(0, 1), (0, 1)])
        assert ci.has_codeword_of_weight_le4(m)

    def test_unscreened_toy_flags(self, toy_outer):
        # the dense toy necessarily carries a low-weight codeword
        assert ci.has_codeword_of_weight_le4(toy_outer.H)


class TestCodeAudits:
    def test_structural_invariants(self, paper_outer):
        ci.validate_code(paper_outer)  # raises on violation

    def test_ace_audit_passes_at_construction_params(self, paper_outer):
        assert ci.ace_audit(paper_outer)

    def test_rate(self, paper_outer):
        assert paper_outer.rate == pytest.approx(128 / 181)
        assert f"{paper_outer.rate:.4f}" == "0.7072"

    def test_validate_catches_broken_dual_diagonal(self, toy_outer):
        cols = list(toy_outer.H.col_support)
        cols[8] = (0, 2)  # parity column 0 should be (0, 1)
        h_bad = ci.SparseBinaryMatrix.from_cols(4, 12, cols)
        bad = ci.IraCode(
            K=8, N=12, M=4, H=h_bad,
            degree_spec=toy_outer.degree_spec, ace=toy_outer.ace, seed=0,
        )
        with pytest.raises(ConstructionError, match="dual-diagonal"):
            ci.validate_code(bad)


class TestCodeFiles:
    def test_save_load_round_trip(self, toy_outer, tmp_path):
        prefix = tmp_path / "toy"
        ci.save_code(toy_outer, prefix)
        again = ci.load_code(prefix)
        assert again.H.row_support == toy_outer.H.row_support
        assert again.degree_spec == toy_outer.degree_spec
        assert again.ace == toy_outer.ace
        assert (again.K, again.N, again.seed) == (8, 12, 11)

    def test_save_deterministic(self, toy_outer, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        ci.save_code(toy_outer, a)
        ci.save_code(toy_outer, b)
        assert a.with_suffix(".alist").read_bytes() == b.with_suffix(".alist").read_bytes()
        assert a.with_suffix(".sidecar").read_bytes() == b.with_suffix(".sidecar").read_bytes()

    def test_sidecar_mismatch_rejected(self, toy_outer, tmp_path):
        prefix = tmp_path / "broken"
        ci.save_code(toy_outer, prefix)
        sidecar = prefix.with_suffix(".sidecar")
        sidecar.write_text(
            sidecar.read_text().replace("check_degree 8", "check_degree 9")
        )
        with pytest.raises(ConstructionError):
            ci.load_code(prefix)
