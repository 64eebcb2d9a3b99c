from datetime import datetime

import numpy as np
import pytest

from pricedyn.synth import KINDS, GeneratorSpec, gen
from pricedyn.timeseries import PriceSeries

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def pareto_samples(rng: np.random.Generator, n: int, gamma: float, x_min: float = 1.0) -> np.ndarray:
    """Inverse-CDF draws with density proportional to x^-(gamma+1) above x_min."""
    return x_min * (1.0 - rng.random(n)) ** (-1.0 / gamma)


def two_regime_samples(rng, n, gamma_lo, gamma_hi, x_min, x_break):
    """Continuous piecewise power-law density with a kink at x_break."""
    mass_lo = (x_min**-gamma_lo - x_break**-gamma_lo) / gamma_lo
    mass_hi = x_break ** (gamma_hi - gamma_lo) * x_break**-gamma_hi / gamma_hi
    lower = rng.random(n) < mass_lo / (mass_lo + mass_hi)
    v = rng.random(n)
    below = (x_min**-gamma_lo - v * (x_min**-gamma_lo - x_break**-gamma_lo)) ** (-1.0 / gamma_lo)
    above = x_break * (1.0 - v) ** (-1.0 / gamma_hi)
    return np.where(lower, below, above)


def fbm_series(H: float, seed: int, length: int, **params):
    return gen(GeneratorSpec("fbm", {"H": H, **params}, seed=seed, length=length))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def fixture_corpus():
    """Every synthetic fixture shape the invariant checks sweep over."""
    for kind in KINDS:
        for seed in range(3):
            for length in (64, 1000, 4096, 10007):
                hursts = (0.2, 0.8) if kind == "fbm" else (None,)
                for H in hursts:
                    params = {"H": H} if H is not None else {}
                    yield f"{kind}-H{H}-s{seed}-n{length}", gen(GeneratorSpec(kind, params, seed=seed, length=length))
    yield "constant", PriceSeries("constant", datetime(2000, 1, 3), np.full(500, 42.0))
