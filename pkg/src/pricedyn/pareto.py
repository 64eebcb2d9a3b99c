"""Normalised price histograms and log-log Pareto tail fits.

The tail index ``gamma`` is defined through the density ``N(x) ~ x^-(gamma+1)``
and fitted by ordinary least squares on (log bin centre, log density).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .timeseries import PriceSeries

MIN_FIT_BINS = 5
DEFAULT_BIN_WIDTH = 5.0
DEFAULT_RANGES = ((1.0, 200.0), (200.0, 1000.0))


class MomentStabilityClass(str, enum.Enum):
    NO_MEAN = "no-mean"
    MEAN_ONLY = "mean-only"
    MEAN_AND_VARIANCE = "mean-and-variance"


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: np.ndarray
    density: np.ndarray
    total_count: int
    counts: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)


@dataclass(frozen=True)
class ParetoEstimate:
    gamma: float
    gamma_err: float
    price_range: tuple[float, float]
    bins_used: int


def _fail(message: str, hint: str | None = None) -> NumericalError:
    return NumericalError(message, module="pareto", hint=hint)


def histogram(series: PriceSeries | np.ndarray, bin_width: float = DEFAULT_BIN_WIDTH,
              price_range: tuple[float, float] | None = None) -> Histogram:
    """Density histogram with constant ``bin_width`` over ``price_range``.

    Bins start at the range's lower bound; the last bin is extended so the
    bins cover the whole range.  Samples outside the range are excluded
    from the normalisation.  The default range is ``[0, max price]``.
    """
    x = np.asarray(getattr(series, "values", series), dtype=np.float64)
    x = x[~np.isnan(x)]
    if bin_width <= 0:
        raise _fail(f"bin width must be positive, got {bin_width}")
    if price_range is None:
        price_range = (0.0, float(x.max()) if len(x) and x.max() > 0 else bin_width)
    lo, hi = map(float, price_range)
    if lo < 0 or hi <= lo:
        raise _fail(f"invalid histogram range [{lo}, {hi}]")
    nbins = max(1, int(np.ceil((hi - lo) / bin_width - 1e-9)))
    # rounding can leave the top edge a hair below hi; the maximum must stay inside
    while lo + bin_width * nbins < hi:
        nbins += 1
    edges = lo + bin_width * np.arange(nbins + 1)
    inside = x[(x >= lo) & (x <= hi)]
    if len(inside) == 0:
        raise _fail(f"no samples inside [{lo}, {hi}]", hint="check the price range")
    counts, _ = np.histogram(inside, bins=edges)
    density = counts / (len(inside) * bin_width)
    return Histogram(edges, density, int(len(inside)), counts)


def pareto_fit(hist: Histogram, price_range: tuple[float, float], weighted: bool = False) -> ParetoEstimate:
    """Fit ``gamma`` over the non-empty bins whose centres lie in ``price_range``.

    Empty bins are skipped.  With ``weighted`` each bin is weighted by its
    count, which tames the noise of sparsely populated tail bins.
    """
    lo, hi = map(float, price_range)
    if lo <= 0:
        raise _fail("log-log fit needs a positive lower price cutoff")
    c = hist.bin_centers
    use = (c >= lo) & (c <= hi) & (hist.density > 0)
    k = int(use.sum())
    if k < MIN_FIT_BINS:
        raise _fail(f"only {k} non-empty bins in [{lo}, {hi}], need {MIN_FIT_BINS}")
    x = np.log10(c[use])
    y = np.log10(hist.density[use])
    w = hist.counts[use].astype(float) if weighted else np.ones(k)
    xm = np.average(x, weights=w)
    ym = np.average(y, weights=w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    resid = y - ym - slope * (x - xm)
    err = float(np.sqrt(np.sum(w * resid**2) / (k - 2) / sxx))
    return ParetoEstimate(float(-slope - 1.0), err, (lo, hi), k)


def classify_moments(est: ParetoEstimate | float) -> MomentStabilityClass:
    """Which moments of the price distribution are finite for this tail index."""
    gamma = getattr(est, "gamma", est)
    if gamma <= 1.0:
        return MomentStabilityClass.NO_MEAN
    if gamma <= 2.0:
        return MomentStabilityClass.MEAN_ONLY
    return MomentStabilityClass.MEAN_AND_VARIANCE


def two_range_report(series: PriceSeries | np.ndarray, ranges=DEFAULT_RANGES,
                     bin_width: float = DEFAULT_BIN_WIDTH, weighted: bool = False):
    """Independent fits over two ascending price ranges.

    A range without enough populated bins yields ``None`` instead of an
    estimate (prices that never reach the upper range, for instance).
    """
    (a_lo, a_hi), (b_lo, b_hi) = ranges
    if not (a_lo < a_hi <= b_lo < b_hi):
        raise _fail(f"ranges must be ascending and non-overlapping, got {ranges}")
    x = np.asarray(getattr(series, "values", series), dtype=np.float64)
    top = max(b_hi, a_hi)
    hist = histogram(x, bin_width, (0.0, top))
    out = []
    for rng in ranges:
        try:
            out.append(pareto_fit(hist, rng, weighted))
        except NumericalError:
            out.append(None)
    return hist, out[0], out[1]
