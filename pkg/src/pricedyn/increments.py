"""Multiscale price increments, lagged-pair diagrams and movement scenarios.

Increments are forward differences of consecutive n-hour bin means, so a
rising price gives a positive increment.  Scenarios for a pair
``(prev, curr)`` with stability threshold ``eps``:

    I    prev > eps   and curr < -eps     rise then fall
    II   |prev| <= eps and curr > eps     stable then rise
    III  prev < -eps  and |curr| <= eps   fall then stable
    IV   prev > eps   and curr > eps      rise then rise
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .timeseries import PriceSeries, aggregate

DEFAULT_SCALES = (1, 12, 24, 168, 720)
DEFAULT_BIN_COUNT = 40
MIN_OCCUPANCY = 10
CLIP_PERCENTILE = 99.5
MIN_PAIRS = 100
MIN_QUADRANT_BINS = 3
EPSILON_MAD_FACTOR = 0.5


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    scale_n: int
    deltas: np.ndarray


@dataclass(frozen=True, eq=False)
class PairSet:
    prev: np.ndarray
    curr: np.ndarray

    def __len__(self) -> int:
        return len(self.prev)


@dataclass(frozen=True)
class QuadrantSlope:
    slope: float
    slope_err: float
    bins_used: int


@dataclass(frozen=True, eq=False)
class BinnedCurve:
    prev_bin_centers: np.ndarray
    mean_prev: np.ndarray
    mean_curr: np.ndarray
    count: np.ndarray
    clip: float
    q4_slope: QuadrantSlope | None
    q1_slope: QuadrantSlope | None


@dataclass(frozen=True)
class ScenarioCounts:
    I: int
    II: int
    III: int
    IV: int
    unclassified: int
    epsilon: float

    @property
    def total(self) -> int:
        return self.I + self.II + self.III + self.IV + self.unclassified

    @property
    def classified(self) -> int:
        return self.I + self.II + self.III + self.IV


def _fail(message: str, hint: str | None = None) -> NumericalError:
    return NumericalError(message, module="increments", hint=hint)


def multiscale_increments(series: PriceSeries, n: int) -> IncrementSeries:
    """Differences of successive non-overlapping n-hour bin means."""
    N = len(series)
    if n < 1 or N // n < 2:
        raise _fail(f"scale {n} leaves fewer than 2 complete bins in {N} samples")
    means = aggregate(series, n).bin_means
    return IncrementSeries(int(n), np.diff(means))


def lag_pairs(incs: IncrementSeries | np.ndarray) -> PairSet:
    d = np.asarray(getattr(incs, "deltas", incs), dtype=np.float64)
    if len(d) < 2:
        raise _fail(f"need at least 2 increments to form pairs, got {len(d)}")
    return PairSet(d[:-1], d[1:])


def _fit_line(x: np.ndarray, y: np.ndarray) -> QuadrantSlope | None:
    if len(x) < MIN_QUADRANT_BINS:
        return None
    xc = x - x.mean()
    sxx = xc @ xc
    if sxx == 0:
        return None
    slope = (xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    err = np.sqrt(max(resid @ resid, 0.0) / (len(x) - 2) / sxx) if len(x) > 2 else 0.0
    return QuadrantSlope(float(slope), float(err), int(len(x)))


def binned_regression(pairs: PairSet, bin_count: int = DEFAULT_BIN_COUNT,
                      min_occupancy: int = MIN_OCCUPANCY) -> BinnedCurve:
    """Average the current increment over uniform bins of the preceding one.

    Bins span ``[-P, P]`` where P is the 99.5th percentile of ``|prev|``;
    pairs beyond it are left out of the curve.  Quadrant slopes are OLS
    fits of bin-mean ``curr`` against bin-mean ``prev`` over occupied bins
    with a positive centre: Q4 where the mean ``curr`` is negative, Q1 where
    it is positive.  A slope is ``None`` with fewer than three such bins.
    """
    if len(pairs) < MIN_PAIRS:
        raise _fail(f"binned regression needs at least {MIN_PAIRS} pairs, got {len(pairs)}")
    if bin_count < 10:
        raise _fail(f"bin_count must be >= 10, got {bin_count}")
    prev, curr = pairs.prev, pairs.curr
    clip = float(np.percentile(np.abs(prev), CLIP_PERCENTILE))
    if clip == 0:
        clip = float(np.abs(prev).max())
    if clip == 0:
        empty = np.empty(0)
        return BinnedCurve(empty, empty, empty, np.empty(0, dtype=int), 0.0, None, None)
    edges = np.linspace(-clip, clip, bin_count + 1)
    inside = np.abs(prev) <= clip
    idx = np.clip(np.searchsorted(edges, prev[inside], side="right") - 1, 0, bin_count - 1)
    count = np.bincount(idx, minlength=bin_count)
    sum_prev = np.bincount(idx, weights=prev[inside], minlength=bin_count)
    sum_curr = np.bincount(idx, weights=curr[inside], minlength=bin_count)
    occupied = count >= min_occupancy
    centers = 0.5 * (edges[:-1] + edges[1:])[occupied]
    n = count[occupied]
    mean_prev = sum_prev[occupied] / n
    mean_curr = sum_curr[occupied] / n
    right = centers > 0
    q4 = right & (mean_curr < 0)
    q1 = right & (mean_curr > 0)
    return BinnedCurve(
        prev_bin_centers=centers,
        mean_prev=mean_prev,
        mean_curr=mean_curr,
        count=n,
        clip=clip,
        q4_slope=_fit_line(mean_prev[q4], mean_curr[q4]),
        q1_slope=_fit_line(mean_prev[q1], mean_curr[q1]),
    )


def default_epsilon(incs: IncrementSeries | np.ndarray) -> float:
    """Half the median absolute deviation of the increments.

    Spiky records can have a zero MAD (most increments exactly zero); the
    mean absolute deviation from the median is used then, and 1.0 if the
    increments are all identical.
    """
    d = np.asarray(getattr(incs, "deltas", incs), dtype=np.float64)
    dev = np.abs(d - np.median(d))
    spread = float(np.median(dev))
    if spread == 0:
        spread = float(dev.mean())
    return EPSILON_MAD_FACTOR * spread if spread > 0 else 1.0


def classify_scenarios(pairs: PairSet, epsilon: float) -> ScenarioCounts:
    if not epsilon > 0:
        raise _fail(f"epsilon must be positive, got {epsilon}")
    p, c = pairs.prev, pairs.curr
    up_p, down_p, flat_p = p > epsilon, p < -epsilon, np.abs(p) <= epsilon
    up_c, down_c, flat_c = c > epsilon, c < -epsilon, np.abs(c) <= epsilon
    s1 = int(np.sum(up_p & down_c))
    s2 = int(np.sum(flat_p & up_c))
    s3 = int(np.sum(down_p & flat_c))
    s4 = int(np.sum(up_p & up_c))
    return ScenarioCounts(s1, s2, s3, s4, len(p) - s1 - s2 - s3 - s4, float(epsilon))


def lag1_correlation(incs: IncrementSeries | np.ndarray) -> float:
    """Sample lag-1 autocorrelation of the increments."""
    d = np.asarray(getattr(incs, "deltas", incs), dtype=np.float64)
    d = d - d.mean()
    denom = d @ d
    return float(d[:-1] @ d[1:] / denom) if denom > 0 else 0.0
