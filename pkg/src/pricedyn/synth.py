"""Seeded synthetic price processes with known correlation structure.

All randomness comes from ``numpy.random.Generator`` over the PCG64 bit
generator (``numpy.random.default_rng(seed)``), so a given spec reproduces
the same path bit-for-bit with the same NumPy release.  Other
implementations are expected to match statistics, not bits.

Kinds and their parameters (defaults in brackets):

    white-noise   mu [0], sigma [1]
    random-walk   x0 [0], sigma [1]
    fbm           H (required), sigma [1], x0 [0]
    ou            mu [50], theta [0.1], sigma [5], x0 [mu]
    mrjd          ou parameters plus intensity [0.01 jumps/h], jump_scale [20]
    spike-train   baseline [50], height [100], rate [0.02], spread [0.5], noise [0]
    sinusoid-mix  periods [[24]], amplitudes [[1]], phases [zeros], offset [0], noise [0]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, NumericalError
from .timeseries import PriceSeries

RNG_ALGORITHM = "numpy.random.PCG64"
MIN_LENGTH = 64
SPIKE_SEPARATION = 3

_DEFAULTS = {
    "white-noise": {"mu": 0.0, "sigma": 1.0},
    "random-walk": {"x0": 0.0, "sigma": 1.0},
    "fbm": {"H": None, "sigma": 1.0, "x0": 0.0},
    "ou": {"mu": 50.0, "theta": 0.1, "sigma": 5.0, "x0": None},
    "mrjd": {
        "mu": 50.0,
        "theta": 0.1,
        "sigma": 5.0,
        "x0": None,
        "intensity": 0.01,
        "jump_scale": 20.0,
    },
    "spike-train": {
        "baseline": 50.0,
        "height": 100.0,
        "rate": 0.02,
        "spread": 0.5,
        "noise": 0.0,
    },
    "sinusoid-mix": {
        "periods": [24.0],
        "amplitudes": [1.0],
        "phases": None,
        "offset": 0.0,
        "noise": 0.0,
    },
}
KINDS = tuple(_DEFAULTS)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    length: int = 4096
    market_id: str = "synthetic"
    # a Monday, so weekday-based peak calendars start on a clean week
    start_time: datetime = datetime(2000, 1, 3)

    def resolved_params(self) -> dict:
        """Kind defaults overlaid with user params, validated."""
        if self.kind not in _DEFAULTS:
            raise ConfigError(f"unknown generator kind {self.kind!r}; choose from {KINDS}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise ConfigError(f"unknown parameter(s) for {self.kind}: {sorted(unknown)}")
        p = {**_DEFAULTS[self.kind], **self.params}
        _validate(self.kind, p, self.length)
        return p


def _validate(kind: str, p: dict, length: int) -> None:
    if length < MIN_LENGTH:
        raise ConfigError(f"length must be >= {MIN_LENGTH}, got {length}")
    for key in ("sigma", "noise", "jump_scale"):
        if key in p and p[key] < 0:
            raise ConfigError(f"{key} must be non-negative, got {p[key]}")
    if kind == "fbm":
        if p["H"] is None or not 0.0 < p["H"] < 1.0:
            raise ConfigError(f"fbm Hurst H must lie in (0, 1), got {p['H']}")
    if kind in ("ou", "mrjd") and not p["theta"] > 0:
        raise ConfigError(f"ou reversion rate theta must be > 0, got {p['theta']}")
    if kind == "mrjd" and p["intensity"] < 0:
        raise ConfigError(f"jump intensity must be >= 0, got {p['intensity']}")
    if kind == "spike-train":
        if not 0.0 <= p["rate"] <= 1.0:
            raise ConfigError(f"spike rate must be in [0, 1], got {p['rate']}")
        if not 0.0 <= p["spread"] < 1.0:
            raise ConfigError(f"spike spread must be in [0, 1), got {p['spread']}")
        if p["height"] <= 0:
            raise ConfigError("spike height must be positive")
    if kind == "sinusoid-mix":
        n = len(p["periods"])
        if len(p["amplitudes"]) != n or (p["phases"] is not None and len(p["phases"]) != n):
            raise ConfigError("periods, amplitudes and phases must have equal length")
        if any(period <= 0 for period in p["periods"]):
            raise ConfigError("sinusoid periods must be positive")


def fgn_autocovariance(H: float, k):
    """Autocovariance of unit-variance fractional Gaussian noise at lag ``k``."""
    k = np.abs(np.asarray(k, dtype=float))
    h2 = 2.0 * H
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def fgn(n: int, H: float, rng: np.random.Generator) -> np.ndarray:
    """Exact fractional Gaussian noise by circulant embedding (Davies-Harte).

    The covariance of the returned vector equals ``fgn_autocovariance``
    exactly; no spectral approximation is involved.
    """
    gamma = fgn_autocovariance(H, np.arange(n + 1))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    if eig.min() < -1e-8 * eig.max():
        raise NumericalError(
            f"circulant embedding not positive semidefinite for H={H}, n={n}",
            module="synth",
        )
    eig = np.clip(eig, 0.0, None)
    m = len(row)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return np.fft.fft(np.sqrt(eig / m) * z)[:n].real


def _mean_reverting(p: dict, length: int, rng: np.random.Generator, jumps: bool) -> np.ndarray:
    # Euler step dt = 1 h: x[t+1] = (1 - theta) x[t] + theta mu + sigma z[t] + J[t]
    x0 = p["mu"] if p["x0"] is None else p["x0"]
    a = 1.0 - p["theta"]
    drive = p["theta"] * p["mu"] + p["sigma"] * rng.standard_normal(length - 1)
    if jumps:
        counts = rng.poisson(p["intensity"], length - 1)
        # sum of k exponential jump sizes is Gamma(k, scale); Gamma(0, .) = 0
        drive = drive + rng.gamma(counts, p["jump_scale"])
    path = lfilter([1.0], [1.0, -a], drive, zi=[a * x0])[0]
    return np.concatenate([[x0], path])


def _spike_positions(candidates: np.ndarray) -> np.ndarray:
    length = len(candidates)
    kept = []
    last = -SPIKE_SEPARATION
    for i in np.flatnonzero(candidates):
        if 1 <= i <= length - 2 and i - last >= SPIKE_SEPARATION:
            kept.append(i)
            last = i
    return np.asarray(kept, dtype=int)


def generate_values(spec: GeneratorSpec) -> np.ndarray:
    p = spec.resolved_params()
    rng = np.random.default_rng(spec.seed)
    L = spec.length
    kind = spec.kind
    if kind == "white-noise":
        return p["mu"] + p["sigma"] * rng.standard_normal(L)
    if kind == "random-walk":
        return p["x0"] + np.cumsum(p["sigma"] * rng.standard_normal(L))
    if kind == "fbm":
        return p["x0"] + p["sigma"] * np.cumsum(fgn(L, p["H"], rng))
    if kind == "ou":
        return _mean_reverting(p, L, rng, jumps=False)
    if kind == "mrjd":
        return _mean_reverting(p, L, rng, jumps=True)
    if kind == "spike-train":
        positions = _spike_positions(rng.random(L) < p["rate"])
        heights = p["height"] * (1.0 + p["spread"] * (2.0 * rng.random(len(positions)) - 1.0))
        x = np.full(L, float(p["baseline"]))
        if p["noise"] > 0:
            x += p["noise"] * rng.standard_normal(L)
        x[positions] += heights
        return x
    # sinusoid-mix
    t = np.arange(L, dtype=float)
    phases = p["phases"] or [0.0] * len(p["periods"])
    x = np.full(L, float(p["offset"]))
    for period, amp, phase in zip(p["periods"], p["amplitudes"], phases):
        x += amp * np.sin(2.0 * np.pi * t / period + phase)
    if p["noise"] > 0:
        x += p["noise"] * rng.standard_normal(L)
    return x


def gen(spec: GeneratorSpec) -> PriceSeries:
    """Generate the hourly price series described by ``spec``."""
    return PriceSeries(spec.market_id, spec.start_time, generate_values(spec), cadence=1)
