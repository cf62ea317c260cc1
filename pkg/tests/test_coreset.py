import itertools

import numpy as np
import pytest

from activepool import (
    Metric,
    RngStream,
    SelectionBatch,
    SelectionError,
    coreset_radius,
    lightweight_weights,
    reveal_labels,
    select_greedy_coreset,
    select_lightweight_coreset,
)

from support import find_cold_start_seed, make_pool


class TestGreedyCoreset:
    def test_enumeration(self):
        pool = make_pool([0.0, 1.0, 10.0])
        rng = RngStream(find_cold_start_seed(pool, 0), "test")
        batch = select_greedy_coreset(pool, 3, Metric.EUCLIDEAN, rng)
        assert batch.indices == [0, 2, 1]

    def test_identical_points_tie_break(self):
        pool = make_pool([2.0, 2.0, 2.0])
        rng = RngStream(find_cold_start_seed(pool, 1), "test")
        batch = select_greedy_coreset(pool, 3, Metric.EUCLIDEAN, rng)
        assert batch.indices == [1, 0, 2]

    def test_warm_start_from_labeled(self, rng):
        pool = make_pool([0.0, 1.0, 2.0, 100.0], labels=[0, 0, 0, 1])
        reveal_labels(pool, SelectionBatch([3], "seed"))
        batch = select_greedy_coreset(pool, 1, Metric.EUCLIDEAN, rng)
        # farthest from the labeled outlier, no random cold start
        assert batch.indices == [0]

    def test_m_too_large(self, rng):
        pool = make_pool([0.0, 1.0])
        with pytest.raises(SelectionError):
            select_greedy_coreset(pool, 3, Metric.EUCLIDEAN, rng)


class TestCoresetRadius:
    def test_full_cover(self):
        pool = make_pool([0.0, 3.0, 7.0])
        assert coreset_radius(pool, {0, 1, 2}, Metric.EUCLIDEAN) == 0.0

    def test_single_center(self):
        pool = make_pool([0.0, 10.0])
        assert coreset_radius(pool, {0}, Metric.EUCLIDEAN) == pytest.approx(10.0)

    def test_hand_value(self):
        pool = make_pool([0.0, 4.0, 10.0])
        assert coreset_radius(pool, {0, 2}, Metric.EUCLIDEAN) == pytest.approx(4.0)

    def test_non_increasing_as_centers_grow(self):
        gen = np.random.default_rng(5)
        pool = make_pool(gen.normal(size=(15, 3)))
        centers = []
        prev = np.inf
        for c in [3, 7, 1, 12, 9]:
            centers.append(c)
            r = coreset_radius(pool, centers, Metric.EUCLIDEAN)
            assert r <= prev + 1e-12
            prev = r


def brute_force_optimal_radius(pool, m, metric):
    n = len(pool)
    best = np.inf
    for centers in itertools.combinations(range(n), m):
        best = min(best, coreset_radius(pool, centers, metric))
    return best


def test_greedy_two_approximation():
    gen = np.random.default_rng(99)
    for trial in range(100):
        n = int(gen.integers(3, 13))
        m = int(gen.integers(1, min(n, 4) + 1))
        pool = make_pool(gen.normal(size=(n, 2)))
        rng = RngStream(int(gen.integers(1 << 30)), f"approx/{trial}")
        batch = select_greedy_coreset(pool, m, Metric.EUCLIDEAN, rng)
        greedy_r = coreset_radius(pool, batch.indices, Metric.EUCLIDEAN)
        optimal_r = brute_force_optimal_radius(pool, m, Metric.EUCLIDEAN)
        assert greedy_r <= 2.0 * optimal_r + 1e-9, trial


class TestLightweightWeights:
    def test_identical_points_uniform(self):
        weights = lightweight_weights(make_pool([5.0, 5.0, 5.0, 5.0]))
        assert np.allclose(weights.q, 0.25)

    def test_hand_arithmetic(self):
        weights = lightweight_weights(make_pool([0.0, 0.0, 3.0]))
        assert np.allclose(weights.q, [0.25, 0.25, 0.5])

    def test_symmetric_pair(self):
        weights = lightweight_weights(make_pool([0.0, 2.0]))
        assert np.allclose(weights.q, [0.5, 0.5])

    def test_distribution_invariants(self):
        gen = np.random.default_rng(21)
        for _ in range(20):
            n = int(gen.integers(2, 30))
            weights = lightweight_weights(make_pool(gen.normal(size=(n, 4))))
            assert weights.q.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(weights.q >= 1.0 / (2 * n) - 1e-12)


class TestLightweightSelect:
    def test_exhaustion(self, rng):
        pool = make_pool([0.0, 1.0, 5.0])
        batch = select_lightweight_coreset(pool, 3, rng)
        assert sorted(batch.indices) == [0, 1, 2]

    def test_no_repeats(self):
        gen = np.random.default_rng(3)
        pool = make_pool(gen.normal(size=(20, 2)))
        for t in range(20):
            batch = select_lightweight_coreset(pool, 10, RngStream(t, "lw"))
            assert len(set(batch.indices)) == 10

    def test_determinism(self):
        pool = make_pool([0.0, 1.0, 4.0, 9.0])
        a = select_lightweight_coreset(pool, 2, RngStream(8, "x"))
        b = select_lightweight_coreset(pool, 2, RngStream(8, "x"))
        assert a.indices == b.indices

    def test_sampling_law_monte_carlo(self):
        # DERIVED oracle: hand weights (0.25, 0.25, 0.5) on the [0, 0, 3] fixture
        pool = make_pool([0.0, 0.0, 3.0])
        counts = np.zeros(3)
        trials = 100_000
        for t in range(trials):
            batch = select_lightweight_coreset(pool, 1, RngStream(77, f"mc/{t}"))
            counts[batch.indices[0]] += 1
        freqs = counts / trials
        assert abs(freqs[2] - 0.5) < 0.01
        assert abs(freqs[0] - 0.25) < 0.01
        assert abs(freqs[1] - 0.25) < 0.01

    def test_zero_variance_uniform_draws(self):
        pool = make_pool([1.0, 1.0, 1.0])
        counts = np.zeros(3)
        trials = 30_000
        for t in range(trials):
            batch = select_lightweight_coreset(pool, 1, RngStream(6, f"zv/{t}"))
            counts[batch.indices[0]] += 1
        assert np.all(np.abs(counts / trials - 1 / 3) < 0.02)
