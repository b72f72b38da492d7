import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from amcmc.core import (FiniteDistribution, KernelMatrix, PrefixSumTree,
                        WeightedEmpirical, WeightFunction,
                        empirical_expectation, reservoir_sample, tv_distance)
from amcmc.errors import DimensionError, DomainError, StateError


def dist(weights):
    return FiniteDistribution.from_weights(weights)


class TestFiniteDistribution:
    def test_rejects_negative_mass(self):
        with pytest.raises(DomainError):
            FiniteDistribution(np.array([0.5, 0.6, -0.1]))

    def test_rejects_bad_total(self):
        with pytest.raises(DomainError):
            FiniteDistribution(np.array([0.5, 0.4]))

    def test_rejects_matrix_input(self):
        with pytest.raises(DimensionError):
            FiniteDistribution(np.eye(2))

    def test_point_mass(self):
        p = FiniteDistribution.point_mass(2, 4)
        assert p[2] == 1.0 and sum(p.probs) == 1.0

    def test_expectation(self):
        p = dist([1, 3])
        assert p.expectation([0.0, 1.0]) == pytest.approx(0.75)
        with pytest.raises(DimensionError):
            p.expectation([1.0, 2.0, 3.0])


class TestKernelMatrix:
    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            KernelMatrix(np.ones((2, 3)) / 3)

    def test_rejects_bad_row_sum(self):
        with pytest.raises(DomainError):
            KernelMatrix(np.array([[0.5, 0.4], [0.5, 0.5]]))

    def test_sample_from_matches_row(self):
        K = KernelMatrix(np.array([[0.2, 0.8], [1.0, 0.0]]))
        rng = np.random.default_rng(0)
        draws = [K.sample_from(0, rng) for _ in range(20_000)]
        assert np.mean(draws) == pytest.approx(0.8, abs=0.01)
        assert all(K.sample_from(1, rng) == 0 for _ in range(100))


class TestWeightFunction:
    def test_ratio_and_bound(self):
        w = WeightFunction.ratio(dist([2, 1]), dist([1, 1]))
        assert w(0) == pytest.approx(4 / 3)
        assert w.w_max == pytest.approx(4 / 3)

    def test_unbounded_ratio_rejected(self):
        with pytest.raises(DomainError):
            WeightFunction.ratio(dist([1, 1]), FiniteDistribution(np.array([1.0, 0.0])))

    def test_callable_requires_bound(self):
        with pytest.raises(DomainError):
            WeightFunction(func=lambda x: x)

    def test_evaluation_above_bound_raises(self):
        w = WeightFunction(func=lambda x: float(x), w_max=2.0)
        assert w(1.5) == 1.5
        with pytest.raises(DomainError):
            w(5.0)


class TestTvDistance:
    def test_known_value(self):
        assert tv_distance(dist([1, 0]), dist([0, 1])) == 1.0
        assert tv_distance(dist([1, 1]), dist([1, 1])) == 0.0

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            tv_distance(dist([1, 1]), dist([1, 1, 1]))

    @given(st.integers(2, 8), st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_metric_properties(self, size, seed):
        rng = np.random.default_rng(seed)
        p = dist(rng.random(size) + 1e-3)
        q = dist(rng.random(size) + 1e-3)
        r = dist(rng.random(size) + 1e-3)
        d_pq = tv_distance(p, q)
        assert 0.0 <= d_pq <= 1.0
        assert d_pq == pytest.approx(tv_distance(q, p))
        assert d_pq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12

    @given(st.integers(2, 8), st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_sign_vector_identity(self, size, seed):
        # TV = (1/2) max over sign vectors f of sum f_i (p_i - q_i)
        rng = np.random.default_rng(seed)
        p = dist(rng.random(size) + 1e-3)
        q = dist(rng.random(size) + 1e-3)
        diff = p.probs - q.probs
        signs = 2.0 * ((np.arange(2 ** size)[:, None]
                        >> np.arange(size)[None, :]) & 1) - 1.0
        brute = 0.5 * (signs @ diff).max()
        assert tv_distance(p, q) == pytest.approx(brute, abs=1e-12)


class TestPrefixSumTree:
    @given(st.lists(st.floats(0.0, 100.0), min_size=1, max_size=200),
           st.integers(0, 10_000))
    @settings(max_examples=80, deadline=None)
    def test_matches_naive_prefix_sums(self, weights, seed):
        tree = PrefixSumTree(capacity=4)
        for w in weights:
            tree.append(w)
        rng = np.random.default_rng(seed)
        for _ in range(min(20, len(weights))):
            i = int(rng.integers(len(weights)))
            weights[i] = float(rng.random() * 10)
            tree.set(i, weights[i])
        assert tree.total == pytest.approx(sum(weights), abs=1e-9)
        total = sum(weights)
        if total > 0:
            cum = np.cumsum(weights)
            for frac in (0.0, 0.31, 0.77, 0.999):
                target = frac * total
                expected = int(np.searchsorted(cum, target, side="right"))
                assert tree.find(target) == min(expected, len(weights) - 1)

    def test_rejects_negative(self):
        tree = PrefixSumTree()
        with pytest.raises(DomainError):
            tree.append(-1.0)


class TestWeightedEmpirical:
    def test_single_atom_always_returned(self):
        res = WeightedEmpirical().push("s", 3.7)
        rng = np.random.default_rng(0)
        assert all(reservoir_sample(res, rng) == "s" for _ in range(50))

    def test_two_atom_frequency(self):
        res = WeightedEmpirical().push(0, 1.0).push(1, 3.0)
        rng = np.random.default_rng(1)
        draws = 100_000
        hits = sum(reservoir_sample(res, rng) for _ in range(draws))
        sigma = np.sqrt(0.75 * 0.25 / draws)
        assert abs(hits / draws - 0.75) < 4 * sigma

    def test_uniform_weights_reduce_to_empirical(self):
        res = WeightedEmpirical()
        for s in range(4):
            res.push(s, 1.0)
        rng = np.random.default_rng(2)
        draws = 40_000
        counts = np.bincount([reservoir_sample(res, rng) for _ in range(draws)],
                             minlength=4)
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_sampling_law_chi_square_million_draws(self):
        # proportional-sampling law at the 1e-3 level over 1e6 draws
        rng = np.random.default_rng(3)
        weights = rng.random(8) + 0.05
        res = WeightedEmpirical()
        for s, w in enumerate(weights):
            res.push(s, float(w))
        draws = 1_000_000
        counts = np.bincount([res.sample(rng) for _ in range(draws)],
                             minlength=8)
        expected = draws * weights / weights.sum()
        assert stats.chisquare(counts, expected).pvalue > 1e-3

    def test_total_weight_tracks_sum(self):
        rng = np.random.default_rng(4)
        res = WeightedEmpirical()
        ws = rng.random(500) * 5
        for i, w in enumerate(ws):
            res.push(i, float(w))
        res.set_weight(17, 0.0)
        ws[17] = 0.0
        assert abs(res.total_weight - ws.sum()) <= 1e-9 * ws.sum()

    def test_empty_reservoir_errors(self):
        rng = np.random.default_rng(0)
        with pytest.raises(StateError):
            WeightedEmpirical().sample(rng)
        with pytest.raises(StateError):
            empirical_expectation(WeightedEmpirical(), lambda s: 1.0)

    def test_expectation_uniform_is_arithmetic_mean(self):
        res = WeightedEmpirical()
        states = [3, 1, 4, 1, 5]
        for s in states:
            res.push(s, 1.0)
        assert empirical_expectation(res, float) == np.mean(states)

    def test_weighted_expectation(self):
        res = WeightedEmpirical().push(0, 1.0).push(1, 3.0)
        assert empirical_expectation(res, float) == pytest.approx(0.75)

    def test_as_distribution_merges_repeat_states(self):
        res = WeightedEmpirical().push(0, 1.0).push(1, 1.0).push(0, 2.0)
        p = res.as_distribution(2)
        assert p.probs == pytest.approx([0.75, 0.25])
