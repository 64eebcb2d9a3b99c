from datetime import datetime

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import fbm_series
from pricedyn.errors import NumericalError
from pricedyn.increments import (
    PairSet,
    binned_regression,
    classify_scenarios,
    default_epsilon,
    lag1_correlation,
    lag_pairs,
    multiscale_increments,
)
from pricedyn.synth import GeneratorSpec, gen
from pricedyn.timeseries import PriceSeries, aggregate

prices = arrays(np.float64, st.integers(8, 300), elements=st.floats(-1e3, 1e3))


def series(values):
    return PriceSeries("m", datetime(2000, 1, 3), values)


def spike_train(length=2**14, seed=1):
    return gen(GeneratorSpec("spike-train", seed=seed, length=length))


class TestIncrements:
    def test_first_differences(self):
        np.testing.assert_array_equal(multiscale_increments(series([1, 2, 3, 4]), 1).deltas, [1, 1, 1])

    def test_two_hour_bins(self):
        np.testing.assert_array_equal(multiscale_increments(series([1, 2, 3, 4]), 2).deltas, [2.0])

    def test_constant(self):
        for n in (1, 2, 5):
            assert np.all(multiscale_increments(series(np.full(30, 7.0)), n).deltas == 0)

    def test_length(self):
        incs = multiscale_increments(series(np.arange(100.0)), 7)
        assert len(incs.deltas) == 100 // 7 - 1 and incs.scale_n == 7

    def test_insufficient_bins(self):
        with pytest.raises(NumericalError):
            multiscale_increments(series(np.arange(10.0)), 6)
        with pytest.raises(NumericalError):
            multiscale_increments(series(np.arange(10.0)), 0)

    @settings(max_examples=60, deadline=None)
    @given(prices, st.data())
    def test_telescoping(self, values, data):
        n = data.draw(st.integers(1, len(values) // 2))
        means = aggregate(series(values), n).bin_means
        deltas = multiscale_increments(series(values), n).deltas
        assert deltas.sum() == pytest.approx(means[-1] - means[0], rel=1e-9, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(prices, st.data())
    def test_matches_differenced_aggregate(self, values, data):
        n = data.draw(st.integers(1, len(values) // 2))
        np.testing.assert_array_equal(
            multiscale_increments(series(values), n).deltas,
            np.diff(aggregate(series(values), n).bin_means),
        )

    @pytest.mark.parametrize("H,sign", [(0.2, -1), (0.8, 1)])
    def test_lag_one_correlation_sign(self, H, sign):
        rho = [lag1_correlation(multiscale_increments(fbm_series(H, s, 2**13), 1)) for s in range(10)]
        assert sign * np.mean(rho) > 0.05


class TestPairs:
    def test_example(self):
        p = lag_pairs(np.array([1.0, -1.0, 0.0]))
        np.testing.assert_array_equal(p.prev, [1, -1])
        np.testing.assert_array_equal(p.curr, [-1, 0])

    def test_zero(self):
        p = lag_pairs(np.zeros(5))
        assert len(p) == 4 and not p.prev.any() and not p.curr.any()

    def test_alternating_on_anti_diagonal(self):
        p = lag_pairs(np.tile([2.5, -2.5], 10))
        np.testing.assert_array_equal(p.curr, -p.prev)

    def test_overlap(self):
        d = np.random.default_rng(0).standard_normal(50)
        p = lag_pairs(d)
        assert len(p) == len(d) - 1
        np.testing.assert_array_equal(p.curr[:-1], p.prev[1:])

    def test_too_short(self):
        with pytest.raises(NumericalError):
            lag_pairs(np.array([1.0]))


class TestBinnedRegression:
    @pytest.mark.parametrize("k", [-1.0, -0.5])
    def test_exact_line(self, k):
        prev = np.random.default_rng(5).uniform(-10, 10, 5000)
        curve = binned_regression(PairSet(prev, k * prev))
        assert curve.q4_slope.slope == pytest.approx(k, abs=1e-12)
        assert curve.q4_slope.slope_err == pytest.approx(0.0, abs=1e-10)
        assert curve.q1_slope is None

    def test_positive_line_goes_to_first_quadrant(self):
        prev = np.random.default_rng(5).uniform(-10, 10, 5000)
        curve = binned_regression(PairSet(prev, 0.3 * prev))
        assert curve.q4_slope is None
        assert curve.q1_slope.slope == pytest.approx(0.3, abs=1e-12)

    def test_spike_train(self):
        pairs = lag_pairs(multiscale_increments(spike_train(), 1))
        curve = binned_regression(pairs)
        assert curve.q4_slope.slope == pytest.approx(-1.0, abs=0.05)
        assert curve.q1_slope is None

    def test_occupancy_and_clip(self):
        rng = np.random.default_rng(2)
        prev = rng.standard_normal(3000)
        curve = binned_regression(PairSet(prev, rng.standard_normal(3000)), bin_count=20)
        assert np.all(curve.count >= 10)
        assert curve.clip == pytest.approx(np.percentile(np.abs(prev), 99.5))
        assert np.all(np.abs(curve.prev_bin_centers) < curve.clip)

    def test_preconditions(self):
        with pytest.raises(NumericalError):
            binned_regression(PairSet(np.zeros(99), np.zeros(99)))
        with pytest.raises(NumericalError):
            binned_regression(PairSet(np.zeros(200), np.zeros(200)), bin_count=9)


class TestScenarios:
    @pytest.mark.parametrize("pair,field", [
        ((10.0, -10.0), "I"),
        ((0.1, 5.0), "II"),
        ((-3.0, 0.5), "III"),
        ((4.0, 2.0), "IV"),
        ((-3.0, -3.0), "unclassified"),
    ])
    def test_quadrant_rules(self, pair, field):
        counts = classify_scenarios(PairSet(np.array([pair[0]]), np.array([pair[1]])), 1.0)
        assert getattr(counts, field) == 1 and counts.total == 1

    def test_spike_train_has_no_persistent_rises(self):
        pairs = lag_pairs(multiscale_increments(spike_train(), 1))
        counts = classify_scenarios(pairs, default_epsilon(pairs.prev))
        assert counts.IV == 0
        assert min(counts.I, counts.II, counts.III) > 0

    def test_epsilon_must_be_positive(self):
        with pytest.raises(NumericalError):
            classify_scenarios(PairSet(np.zeros(3), np.zeros(3)), 0.0)

    def test_default_epsilon(self):
        assert default_epsilon(np.array([-2.0, -1.0, 0.0, 1.0, 2.0])) == 0.5
        # zero MAD falls back to mean absolute deviation, then to one
        assert default_epsilon(np.array([0.0, 0.0, 0.0, 8.0])) == pytest.approx(1.0)
        assert default_epsilon(np.zeros(4)) == 1.0

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.integers(2, 200), elements=st.floats(-100, 100)),
           arrays(np.float64, st.integers(2, 200), elements=st.floats(-100, 100)),
           st.floats(0.01, 50))
    def test_partition(self, a, b, eps):
        m = min(len(a), len(b))
        c = classify_scenarios(PairSet(a[:m], b[:m]), eps)
        assert c.total == m and c.classified + c.unclassified == m

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.integers(8, 300), elements=st.floats(0, 1e3)),
           st.integers(-8, 8), st.floats(0.01, 100))
    def test_epsilon_scaling(self, values, k, eps):
        c = 2.0**k  # exact in binary, so scaling commutes with every rounding step
        base = classify_scenarios(lag_pairs(multiscale_increments(series(values), 1)), eps)
        scaled = classify_scenarios(lag_pairs(multiscale_increments(series(c * values), 1)), c * eps)
        assert (base.I, base.II, base.III, base.IV, base.unclassified) == (
            scaled.I, scaled.II, scaled.III, scaled.IV, scaled.unclassified)
