"""Fourier power spectrum, spectral exponent and cycle detection.

The periodogram is one-sided: positive frequencies from 1/T up to Nyquist,
scaled so that ``sum(S) * df`` equals the variance of the mean-removed
record.  Records are truncated to the largest power of two before the FFT.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .timeseries import PriceSeries

MIN_LENGTH = 64
DEFAULT_BINS_PER_DECADE = 8
DEFAULT_EXCLUSIONS = (24.0, 168.0)
EXCLUSION_HALF_WIDTH = 0.05
EXCLUDED_HARMONICS = 3
MIN_FIT_BINS = 10
PEAK_HALF_WIDTH = 0.02
BACKGROUND_HALF_WIDTH = 0.20
MIN_BACKGROUND_LINES = 4
# typical alpha_theor uncertainty quoted in published hourly-price tables;
# echoed in reports for comparison only, never used in computation
REFERENCE_ALPHA_THEOR_SPREAD = 0.53


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequencies: np.ndarray
    power: np.ndarray
    record_length: float
    samples_used: int
    samples_dropped: int
    window: str = "none"


@dataclass(frozen=True)
class BetaEstimate:
    beta: float
    beta_err: float
    fit_range: tuple[float, float]
    alpha_theor: float
    alpha_theor_err: float
    bins_used: int


@dataclass(frozen=True)
class CycleEntry:
    period: float
    peak_power: float
    background_power: float
    significance: float


@dataclass(frozen=True)
class CycleReport:
    entries: tuple[CycleEntry, ...]

    def significance(self, period: float) -> float:
        for e in self.entries:
            if e.period == period:
                return e.significance
        raise KeyError(period)


def _fail(message: str, hint: str | None = None) -> NumericalError:
    return NumericalError(message, module="spectral", hint=hint)


def periodogram(series: PriceSeries | np.ndarray, window: str = "none", cadence: float | None = None) -> Spectrum:
    """One-sided periodogram ``S(f) = |X_T(f)|^2 / T`` with the mean removed.

    Args:
        series: Cleaned price series (or a bare array of hourly samples).
        window: ``"none"`` (rectangular) or ``"hann"``.  The Hann taper is
            normalised to unit mean square, so Parseval holds only on average.
        cadence: Sampling interval in hours; taken from the series if omitted.
    """
    x = np.asarray(getattr(series, "values", series), dtype=np.float64)
    dt = float(cadence if cadence is not None else getattr(series, "cadence", 1))
    if len(x) < MIN_LENGTH:
        raise _fail(f"periodogram needs at least {MIN_LENGTH} samples, got {len(x)}")
    if np.isnan(x).any():
        raise _fail("series contains missing samples", hint="run clean() first")
    n = 1 << (len(x).bit_length() - 1)
    dropped = len(x) - n
    x = x[:n] - x[:n].mean()
    if window == "hann":
        taper = np.hanning(n)
        x = x * taper / np.sqrt(np.mean(taper**2))
    elif window != "none":
        raise _fail(f"unknown window {window!r}")
    T = n * dt
    X = dt * np.fft.rfft(x)[1:]
    power = np.abs(X) ** 2 / T
    # fold negative frequencies onto positive ones; Nyquist appears once
    power[:-1] *= 2.0
    freqs = np.arange(1, n // 2 + 1) / T
    return Spectrum(freqs, power, T, n, dropped, window)


def excluded_mask(freqs: np.ndarray, periods, half_width: float = EXCLUSION_HALF_WIDTH,
                  harmonics: int = EXCLUDED_HARMONICS) -> np.ndarray:
    """True where a frequency lies within ±half_width of a period's line or its harmonics."""
    mask = np.zeros(len(freqs), dtype=bool)
    for period in periods:
        for h in range(1, harmonics + 2):
            f0 = h / period
            mask |= np.abs(freqs - f0) <= half_width * f0
    return mask


def log_binned(freqs: np.ndarray, power: np.ndarray, bins_per_decade: int = DEFAULT_BINS_PER_DECADE):
    """Average ``log10 f`` and ``log10 S`` inside log-uniform frequency bins.

    Averaging the logarithm (rather than the power) keeps every bin's bias
    the same constant regardless of how many raw points it holds, so the
    slope is not distorted at the sparse low-frequency end.
    """
    keep = power > 0
    lf = np.log10(freqs[keep])
    lp = np.log10(power[keep])
    if len(lf) == 0:
        return np.empty(0), np.empty(0), np.empty(0, dtype=int)
    idx = np.floor((lf - lf[0]) * bins_per_decade + 1e-9).astype(int)
    labels, inverse, counts = np.unique(idx, return_inverse=True, return_counts=True)
    x = np.bincount(inverse, weights=lf) / counts
    y = np.bincount(inverse, weights=lp) / counts
    return x, y, counts


def spectral_exponent(
    spec: Spectrum,
    fit_range: tuple[float, float] | None = None,
    exclusions=DEFAULT_EXCLUSIONS,
    bins_per_decade: int = DEFAULT_BINS_PER_DECADE,
) -> BetaEstimate:
    """Fit ``S(f) ~ f^-beta`` on log-binned spectral power.

    Bands of ±5 % around each excluded period's line and its first three
    harmonics are removed before binning.  ``alpha_theor = (beta + 1) / 2``.
    """
    f, S = spec.frequencies, spec.power
    lo, hi = fit_range if fit_range is not None else (f[0], f[-1])
    if lo >= hi or lo < f[0] * (1 - 1e-9) or hi > f[-1] * (1 + 1e-9):
        raise _fail(f"fit range [{lo}, {hi}] outside spectrum support [{f[0]}, {f[-1]}]")
    sel = (f >= lo * (1 - 1e-12)) & (f <= hi * (1 + 1e-12))
    if exclusions:
        sel &= ~excluded_mask(f, exclusions)
    if not sel.any():
        raise _fail("fit range is empty after exclusions")
    x, y, _ = log_binned(f[sel], S[sel], bins_per_decade)
    if len(x) < MIN_FIT_BINS:
        raise _fail(
            f"only {len(x)} log-bins in the fit range, need {MIN_FIT_BINS}",
            hint="widen the fit range or use a longer series",
        )
    xc = x - x.mean()
    slope = (xc @ (y - y.mean())) / (xc @ xc)
    resid = y - y.mean() - slope * xc
    err = float(np.sqrt((resid @ resid) / (len(x) - 2) / (xc @ xc)))
    beta = float(-slope)
    return BetaEstimate(
        beta=beta,
        beta_err=err,
        fit_range=(float(lo), float(hi)),
        alpha_theor=(beta + 1.0) / 2.0,
        alpha_theor_err=err / 2.0,
        bins_used=len(x),
    )


def detect_cycles(spec: Spectrum, candidate_periods=DEFAULT_EXCLUSIONS) -> CycleReport:
    """Peak-to-background power ratio at each candidate period.

    The peak is the largest power within ±2 % of the candidate frequency
    (the nearest frequency line is always included); the background is the
    median power over ±20 % excluding the peak window.
    """
    f, S = spec.frequencies, spec.power
    T = spec.record_length
    entries = []
    for period in candidate_periods:
        period = float(period)
        if not 2.0 < period < T / 2.0:
            raise _fail(f"candidate period {period} h outside (2, {T / 2}) h")
        f0 = 1.0 / period
        dist = np.abs(f - f0)
        peak_win = dist <= PEAK_HALF_WIDTH * f0
        peak_win[np.argmin(dist)] = True
        band = (dist <= BACKGROUND_HALF_WIDTH * f0) & ~peak_win
        if band.sum() < MIN_BACKGROUND_LINES:
            raise _fail(f"too few background lines around {period} h; series too short")
        peak = float(S[peak_win].max())
        background = float(np.median(S[band]))
        if background > 0:
            ratio = peak / background
        else:
            ratio = 0.0 if peak == 0 else float("inf")
        entries.append(CycleEntry(period, peak, background, ratio))
    return CycleReport(tuple(entries))
