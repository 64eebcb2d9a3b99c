"""Scale-dependent detrended fluctuation analysis applied directly to prices.

Because the input is the price level rather than returns, the fluctuation
exponent of a self-similar path with Hurst index H is ``alpha = H + 1``;
a random walk gives 1.5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .timeseries import PriceSeries

MIN_SCALE = 4
MAX_DEFAULT_SCALE = 720
DEFAULT_SCALE_COUNT = 60
DEFAULT_BINS_PER_DECADE = 8
MIN_POINTS_PER_BIN = 3


@dataclass(frozen=True, eq=False)
class Profile:
    values: np.ndarray
    source_mean: float


@dataclass(frozen=True, eq=False)
class FluctuationCurve:
    scales: np.ndarray
    F: np.ndarray


@dataclass(frozen=True, eq=False)
class ScaleExponentCurve:
    bin_centers: np.ndarray
    alpha_local: np.ndarray
    alpha_err: np.ndarray
    bin_sizes: np.ndarray


@dataclass(frozen=True)
class DfaSummary:
    alpha_mean: float
    alpha_mean_err: float
    alpha_max: float
    alpha_max_err: float
    alpha_max_scale: float


def _fail(message: str, hint: str | None = None) -> NumericalError:
    return NumericalError(message, module="dfa", hint=hint)


def integrate_profile(series: PriceSeries | np.ndarray) -> Profile:
    """Cumulative sum of mean-subtracted prices."""
    x = np.asarray(getattr(series, "values", series), dtype=np.float64)
    if len(x) < 2:
        raise _fail(f"a profile needs at least 2 samples, got {len(x)}")
    if np.isnan(x).any():
        raise _fail("series contains missing samples", hint="run clean() first")
    mean = float(x.mean())
    return Profile(np.cumsum(x - mean), mean)


def default_scales(N: int, count: int = DEFAULT_SCALE_COUNT, lo: int = MIN_SCALE, hi: int | None = None) -> np.ndarray:
    """Log-spaced integer scales in ``[lo, min(720, N/4)]``, deduplicated."""
    hi = min(MAX_DEFAULT_SCALE, N // 4) if hi is None else min(hi, N // 4)
    if hi < lo:
        raise _fail(f"series of length {N} too short for scales >= {lo}")
    return np.unique(np.round(np.geomspace(lo, hi, count)).astype(int))


def _box_mean_square(y: np.ndarray, n: int) -> np.ndarray:
    """Mean squared residual of a least-squares line in each length-n box."""
    M = len(y) // n
    boxes = y[: M * n].reshape(M, n)
    k = np.arange(n, dtype=np.float64)
    kc = k - k.mean()
    yc = boxes - boxes.mean(axis=1, keepdims=True)
    slope = yc @ kc / (kc @ kc)
    resid = yc - slope[:, None] * kc
    return np.mean(resid * resid, axis=1)


def fluctuation_function(profile: Profile, scales=None, *, both_ends: bool = False) -> FluctuationCurve:
    """Root-mean-square residual of linearly detrended boxes for each scale.

    Boxes of length n tile the profile from its head; remainder samples at
    the tail are ignored.  With ``both_ends`` the partition is repeated from
    the tail and the mean squares of both passes are averaged.
    """
    y = profile.values
    N = len(y)
    scales = default_scales(N) if scales is None else np.asarray(scales, dtype=int)
    if scales.ndim != 1 or len(scales) == 0:
        raise _fail("scale grid must be a non-empty 1-D sequence")
    if np.any(np.diff(scales) <= 0):
        raise _fail("scales must be strictly increasing")
    F = np.empty(len(scales))
    for i, n in enumerate(scales):
        n = int(n)
        if n < MIN_SCALE or n > N // 4:
            raise _fail(f"scale {n} outside [{MIN_SCALE}, {N // 4}] for N={N}")
        ms = _box_mean_square(y, n)
        if both_ends and N % n:
            ms = np.concatenate([ms, _box_mean_square(y[::-1], n)])
        F[i] = np.sqrt(ms.mean())
    return FluctuationCurve(scales.copy(), F)


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and slope standard error of an ordinary least-squares line."""
    xc = x - x.mean()
    sxx = xc @ xc
    slope = (xc @ (y - y.mean())) / sxx
    intercept = y.mean() - slope * x.mean()
    dof = len(x) - 2
    if dof > 0:
        resid = y - (intercept + slope * x)
        err = float(np.sqrt(max(resid @ resid, 0.0) / dof / sxx))
    else:
        err = 0.0
    return float(slope), float(intercept), err


def _log_bins(log_x: np.ndarray, bins_per_decade: int, min_points: int) -> list[np.ndarray]:
    """Group sorted log10 abscissae into equal-width bins, merging sparse ones rightward.

    The bin count is the nearest integer to ``span * bins_per_decade`` so the
    bins tile the range exactly and no narrow partial bin is left at the end.
    """
    span = log_x[-1] - log_x[0]
    nbins = max(1, int(round(span * bins_per_decade)))
    width = span / nbins if span > 0 else 1.0
    idx = np.minimum(np.floor((log_x - log_x[0]) / width + 1e-9).astype(int), nbins - 1)
    groups = [np.flatnonzero(idx == b) for b in np.unique(idx)]
    merged: list[np.ndarray] = []
    pending = np.empty(0, dtype=int)
    for g in groups:
        pending = np.concatenate([pending, g])
        if len(pending) >= min_points:
            merged.append(pending)
            pending = np.empty(0, dtype=int)
    if len(pending):
        if not merged:
            merged.append(pending)
        else:
            merged[-1] = np.concatenate([merged[-1], pending])
    return merged


def local_exponents(curve: FluctuationCurve, bins_per_decade: int = DEFAULT_BINS_PER_DECADE) -> ScaleExponentCurve:
    """Local log-log slopes of F(n) over log-uniform scale bins."""
    if bins_per_decade < 2:
        raise _fail(f"bins_per_decade must be >= 2, got {bins_per_decade}")
    n = np.asarray(curve.scales, dtype=np.float64)
    F = np.asarray(curve.F, dtype=np.float64)
    if np.any(F <= 0):
        raise _fail("F(n) must be positive to take logarithms",
                    hint="the profile is exactly linear at some scale")
    if len(n) < MIN_POINTS_PER_BIN:
        raise _fail(f"need at least {MIN_POINTS_PER_BIN} scales, got {len(n)}")
    log_n, log_F = np.log10(n), np.log10(F)
    centers, alpha, err, sizes = [], [], [], []
    for members in _log_bins(log_n, bins_per_decade, MIN_POINTS_PER_BIN):
        if len(members) < MIN_POINTS_PER_BIN or np.ptp(log_n[members]) == 0:
            raise _fail("degenerate scale bin after merging")
        slope, _, slope_err = _ols(log_n[members], log_F[members])
        centers.append(np.sqrt(n[members[0]] * n[members[-1]]))
        alpha.append(slope)
        err.append(slope_err)
        sizes.append(len(members))
    return ScaleExponentCurve(np.array(centers), np.array(alpha), np.array(err), np.array(sizes))


def summary_exponents(curve: ScaleExponentCurve) -> DfaSummary:
    """Mean, spread and maximum of the local exponents."""
    a = np.asarray(curve.alpha_local)
    if len(a) < 2:
        raise _fail(f"summary needs at least 2 scale bins, got {len(a)}",
                    hint="widen the scale range or raise bins_per_decade")
    imax = int(np.argmax(a))
    return DfaSummary(
        alpha_mean=float(a.mean()),
        alpha_mean_err=float(a.std(ddof=1)),
        alpha_max=float(a[imax]),
        alpha_max_err=float(curve.alpha_err[imax]),
        alpha_max_scale=float(curve.bin_centers[imax]),
    )


def global_exponent(curve: FluctuationCurve) -> tuple[float, float]:
    """Single OLS slope of log F against log n over the whole curve."""
    slope, _, err = _ols(np.log10(curve.scales.astype(float)), np.log10(curve.F))
    return slope, err


def dfa(series, scales=None, bins_per_decade: int = DEFAULT_BINS_PER_DECADE, both_ends: bool = False):
    """Run the full chain and return ``(curve, exponents, summary)``."""
    curve = fluctuation_function(integrate_profile(series), scales, both_ends=both_ends)
    exps = local_exponents(curve, bins_per_decade)
    return curve, exps, summary_exponents(exps)
