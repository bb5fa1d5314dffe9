import numpy as np
import pytest

from cssp.data_io import Exponential, SyntheticSpec, generate_synthetic
from cssp.linalg import fro_norm_sq, frobenius_tail, rank_k_column_projection
from cssp.rng import RngStream
from cssp.samplers import (
    SamplerKind,
    SamplerSpec,
    additive_error_sample,
    column_norm_distribution,
    default_stage_split,
    dual_set_select,
    leverage_distribution,
    leverage_score_sample,
    near_optimal_select,
)

from conftest import gaussian, matrix_with_spectrum


class TestAdditiveError:
    def test_distribution_from_column_norms(self):
        a = np.array([[3.0, 0.0], [0.0, 4.0]])
        np.testing.assert_allclose(column_norm_distribution(a), [9 / 25, 16 / 25])

    def test_point_mass_on_single_nonzero_column(self):
        a = np.zeros((3, 4))
        a[:, 2] = [1.0, -2.0, 0.5]
        for seed in range(5):
            assert additive_error_sample(a, 1, RngStream(seed)).indices == (2,)

    def test_empirical_frequencies_uniform_on_identity(self):
        # 5e4 calls x c=2 -> 1e5 index draws; symmetry keeps the collapsed
        # counts uniform.
        a = np.eye(4)
        counts = np.zeros(4)
        stream = RngStream(2025)
        for i in range(50_000):
            for idx in additive_error_sample(a, 2, stream.child(i)).indices:
                counts[idx] += 1
        freq = counts / counts.sum()
        np.testing.assert_allclose(freq, 0.25, atol=0.0025)  # within 1% of 1/4

    def test_all_zero_matrix_degenerate(self):
        with pytest.raises(ValueError, match="degenerate distribution"):
            additive_error_sample(np.zeros((3, 3)), 1, RngStream(0))

    def test_duplicates_collapsed(self):
        a = np.eye(3)
        cs = additive_error_sample(a, 2, RngStream(7))
        assert len(set(cs.indices)) == len(cs.indices) <= 2

    def test_request_covering_all_columns_returns_all(self):
        a = gaussian(4, 6, 3)
        assert sorted(additive_error_sample(a, 6, RngStream(1)).indices) == list(range(6))
        assert sorted(additive_error_sample(a, 99, RngStream(1)).indices) == list(range(6))

    def test_deterministic_given_stream(self):
        a = gaussian(5, 30, 4)
        s = RngStream(9, ("x",))
        assert additive_error_sample(a, 4, s) == additive_error_sample(a, 4, s)


class TestLeverageScore:
    def test_distribution_sums_to_one(self):
        for seed in range(5):
            p = leverage_distribution(gaussian(6, 12, seed), 3)
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(p >= 0)

    def test_concentrates_on_dominant_column(self):
        a = np.zeros((2, 4))
        a[0, 0] = 5.0
        a[1, 1] = 1e-6
        p = leverage_distribution(a, 1)
        assert p[0] >= 1.0 - 1e-10

    def test_k_at_or_above_rank_rejected(self):
        a = np.outer([1.0, 2.0, 3.0], [1.0, 0.0, 1.0, 2.0])  # rank 1
        with pytest.raises(ValueError, match="rank"):
            leverage_score_sample(a, 1, 2, RngStream(0))

    def test_deterministic_given_stream(self):
        a = gaussian(6, 20, 5)
        s = RngStream(3, ("t",))
        assert leverage_score_sample(a, 2, 5, s) == leverage_score_sample(a, 2, 5, s)

    def test_zero_leverage_columns_never_drawn(self):
        a = np.zeros((4, 5))
        a[:2, :2] = np.array([[2.0, 0.0], [0.0, 1.0]])
        for seed in range(10):
            cs = leverage_score_sample(a, 1, 3, RngStream(seed))
            assert all(i < 2 for i in cs.indices)


class TestNearOptimal:
    def test_default_stage_split_respects_dual_set_requirement(self):
        # k < r and at least one stage-2 column for every legal c.
        for k in range(1, 8):
            for c in range(k + 2, 5 * k + 3):
                r = default_stage_split(k, c)
                assert k < r
                assert c - r >= 1
                assert r <= 2 * k + 1

    def test_indices_distinct_and_in_range(self):
        a = gaussian(20, 40, 6)
        cs = near_optimal_select(a, 3, 10, RngStream(8))
        assert len(set(cs.indices)) == len(cs.indices) <= 10
        assert all(0 <= i < 40 for i in cs.indices)

    def test_rank_k_input_captured_exactly_by_stage_one(self):
        a = matrix_with_spectrum(12, 30, [3.0, 2.0, 1.0], seed=9)  # rank 3
        with pytest.warns(RuntimeWarning, match="stage-2 residual is zero"):
            cs = near_optimal_select(a, 3, 6, RngStream(1))
        c = a[:, list(cs.indices)]
        err = fro_norm_sq(a - rank_k_column_projection(a, c, 3))
        assert err <= (1e-8 * np.linalg.norm(a)) ** 2

    def test_too_few_columns_rejected(self):
        a = gaussian(10, 20, 7)
        with pytest.raises(ValueError):
            near_optimal_select(a, 3, 3, RngStream(0))  # c == k
        with pytest.raises(ValueError, match="stage 2"):
            near_optimal_select(a, 3, 4, RngStream(0))  # c == k+1, no stage-2 budget

    def test_stage_split_override(self):
        a = gaussian(20, 50, 10)
        cs = near_optimal_select(a, 2, 12, RngStream(2), stage_split=7)
        assert len(cs) <= 12
        with pytest.raises(ValueError, match="k < r < n"):
            near_optimal_select(a, 2, 12, RngStream(2), stage_split=2)

    def test_deterministic_given_stream(self):
        a = gaussian(15, 60, 11)
        s = RngStream(5, ("trial", 0))
        assert near_optimal_select(a, 2, 8, s) == near_optimal_select(a, 2, 8, s)

    def test_beats_additive_error_one_shot(self):
        # Head-to-head at k=5, c=10 on an exponential-spectrum 200x1000
        # matrix, mean over 5 seeds.
        a = generate_synthetic(SyntheticSpec(200, 1000, Exponential(0.1), seed=7))
        tail = frobenius_tail(np.linalg.svd(a, compute_uv=False), 5)

        def sq_err(cs):
            c = a[:, list(cs.indices)]
            return fro_norm_sq(a - rank_k_column_projection(a, c, 5))

        near = np.mean(
            [sq_err(near_optimal_select(a, 5, 10, RngStream(3, ("n", i)))) for i in range(5)]
        )
        additive = np.mean(
            [sq_err(additive_error_sample(a, 10, RngStream(3, ("a", i)))) for i in range(5)]
        )
        assert near <= additive
        assert near >= tail - 1e-8  # sanity: nothing beats the SVD floor

    def test_expected_relative_error_contract(self):
        # c = ceil(2k / eps) columns should land within (1 + eps) of the
        # best rank-k error in expectation (5% slack), k=2, eps=0.5.
        for master in (11, 22):
            a = gaussian(20, 60, master)
            tail = frobenius_tail(np.linalg.svd(a, compute_uv=False), 2)
            errs = []
            for i in range(200):
                cs = near_optimal_select(a, 2, 8, RngStream(master, ("rep", i)))
                c = a[:, list(cs.indices)]
                errs.append(fro_norm_sq(a - rank_k_column_projection(a, c, 2)))
            assert np.mean(errs) <= 1.5 * tail * 1.05


class TestSamplerSpec:
    def test_dispatch_matches_direct_calls(self):
        a = gaussian(12, 30, 12)
        s = RngStream(6, ("d",))
        assert SamplerSpec(SamplerKind.ADDITIVE_ERROR).sample(a, 2, 5, s) == additive_error_sample(a, 5, s)
        assert SamplerSpec(SamplerKind.LEVERAGE_SCORE).sample(a, 2, 5, s) == leverage_score_sample(a, 2, 5, s)
        assert SamplerSpec(SamplerKind.DUAL_SET).sample(a, 2, 5, s) == dual_set_select(a, 2, 5)
        assert SamplerSpec(SamplerKind.NEAR_OPTIMAL).sample(a, 2, 8, s) == near_optimal_select(a, 2, 8, s)

    def test_stage_split_only_for_near_optimal(self):
        with pytest.raises(ValueError):
            SamplerSpec(SamplerKind.LEVERAGE_SCORE, stage_split=4)

    def test_kind_coerced_from_string(self):
        assert SamplerSpec("near-optimal").kind is SamplerKind.NEAR_OPTIMAL
