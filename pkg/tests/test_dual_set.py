import numpy as np
import pytest

from cssp.linalg import fro_norm_sq
from cssp.samplers import dual_set_select, dual_set_sparsify, sampling_matrix

from conftest import gaussian, matrix_with_spectrum


def orthonormal_columns(n, k, seed):
    return np.linalg.qr(gaussian(n, k, seed))[0]


def assert_lemma_guarantees(v, x, r, weights):
    n, k = v.shape
    assert np.count_nonzero(weights) <= r
    assert np.all(weights >= 0)
    s = sampling_matrix(weights, r)
    sigma_k = np.linalg.svd(v.T @ s, compute_uv=False)[k - 1]
    assert sigma_k >= 1.0 - np.sqrt(k / r) - 1e-8
    assert np.linalg.norm(x.T @ s) <= np.linalg.norm(x) + 1e-8


class TestDualSetSparsify:
    def test_lemma_guarantees_on_random_instances(self):
        gen = np.random.default_rng(0)
        for trial in range(60):
            n = 40
            k = int(gen.integers(2, 4))
            r = int(gen.integers(k + 1, 11))
            v = orthonormal_columns(n, k, 500 + trial)
            x = gaussian(n, int(gen.integers(1, 12)), 900 + trial)
            assert_lemma_guarantees(v, x, r, dual_set_sparsify(v, x, r))

    def test_normalized_all_ones_direction(self):
        v = np.full((6, 1), 1.0 / np.sqrt(6.0))
        x = gaussian(6, 4, 1)
        assert_lemma_guarantees(v, x, 2, dual_set_sparsify(v, x, 2))

    def test_barrier_feasible_at_every_step(self):
        for trial in range(10):
            v = orthonormal_columns(30, 3, trial)
            x = gaussian(30, 5, 60 + trial)
            _, states = dual_set_sparsify(v, x, 8, return_states=True)
            assert len(states) == 8
            for state in states:
                assert np.linalg.eigvalsh(state.gram)[0] > state.barrier
                assert np.count_nonzero(state.weights) <= state.tau + 1

    def test_deterministic(self):
        v = orthonormal_columns(25, 2, 42)
        x = gaussian(25, 3, 43)
        np.testing.assert_array_equal(dual_set_sparsify(v, x, 6), dual_set_sparsify(v, x, 6))

    def test_zero_x_is_legal(self):
        # Spectral-only selection; the Frobenius constraint is vacuous.
        v = orthonormal_columns(12, 2, 3)
        weights = dual_set_sparsify(v, np.zeros((12, 0)), 5)
        assert_lemma_guarantees(v, np.zeros((12, 1)), 5, weights)

    def test_parameter_validation(self):
        v = orthonormal_columns(10, 3, 4)
        x = gaussian(10, 2, 5)
        with pytest.raises(ValueError, match="k < r < n"):
            dual_set_sparsify(v, x, 3)  # r == k
        with pytest.raises(ValueError, match="k < r < n"):
            dual_set_sparsify(v, x, 10)  # r == n
        with pytest.raises(ValueError, match="identity"):
            dual_set_sparsify(gaussian(10, 3, 6), x, 5)
        with pytest.raises(ValueError, match="one row per row"):
            dual_set_sparsify(v, gaussian(9, 2, 7), 5)


class TestSamplingMatrix:
    def test_shape_and_weight_placement(self):
        weights = np.array([0.0, 2.25, 0.0, 1.0])
        s = sampling_matrix(weights, 3)
        assert s.shape == (4, 3)
        np.testing.assert_allclose(sorted(s[s > 0]), [1.0, 1.5])
        assert np.count_nonzero(s) == 2

    def test_too_many_nonzeros_rejected(self):
        with pytest.raises(ValueError):
            sampling_matrix(np.ones(4), 3)


class TestDualSetSelect:
    def test_returns_nonzero_weight_columns(self):
        a = gaussian(15, 25, 8)
        cs = dual_set_select(a, 2, 6)
        assert 1 <= len(cs) <= 6
        assert all(0 <= i < 25 for i in cs.indices)

    def test_deterministic_and_spans_rank_k_matrix(self):
        a = matrix_with_spectrum(10, 24, [2.0, 1.0], seed=5)  # rank 2
        cs1, cs2 = dual_set_select(a, 2, 4), dual_set_select(a, 2, 4)
        assert cs1 == cs2
        c = a[:, list(cs1.indices)]
        q = np.linalg.qr(c)[0]
        assert fro_norm_sq(a - q @ (q.T @ a)) <= 1e-16 * fro_norm_sq(a)

    def test_k_above_rank_rejected(self):
        a = matrix_with_spectrum(8, 16, [1.0], seed=6)
        with pytest.raises(ValueError, match="rank"):
            dual_set_select(a, 2, 5)
