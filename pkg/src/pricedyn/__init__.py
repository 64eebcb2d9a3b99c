"""Predictability diagnostics for hourly price series.

Scale-dependent detrended fluctuation analysis, spectral exponents, Pareto
tail indices and multiscale increment scenarios, plus seeded synthetic
processes used to validate the estimators.
"""

__version__ = "0.1.0"
