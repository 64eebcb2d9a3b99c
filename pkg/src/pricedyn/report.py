"""Full analysis pipeline, JSON report assembly and cross-market tables."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .config import AnalysisConfig
from .dfa import default_scales, fluctuation_function, integrate_profile, local_exponents, summary_exponents
from .errors import DataError, NumericalError, PricedynError
from .increments import (
    MIN_PAIRS,
    binned_regression,
    classify_scenarios,
    default_epsilon,
    lag1_correlation,
    lag_pairs,
    multiscale_increments,
)
from .pareto import classify_moments, two_range_report
from .spectral import REFERENCE_ALPHA_THEOR_SPREAD, detect_cycles, periodogram, spectral_exponent
from .timeseries import PriceSeries, clean, load_csv, split_peak

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
SERIES_LABELS = ("all", "on-peak", "off-peak")


class AnalysisFailure(PricedynError):
    """A module error annotated with the series it occurred on."""

    def __init__(self, label: str, error: PricedynError):
        super().__init__(f"series '{label}': {error}", hint=error.hint)
        self.module = error.module
        self.exit_code = error.exit_code
        self.label = label


def report_schema() -> dict:
    return json.loads(resources.files("pricedyn").joinpath("report_schema.json").read_text("utf-8"))


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _sanitize(obj):
    """Replace non-finite floats by None so the report stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    return _finite(obj)


def _slope(s):
    return None if s is None else {"slope": s.slope, "slope_err": s.slope_err, "bins_used": s.bins_used}


def analyze_series(series: PriceSeries, config: AnalysisConfig):
    """Run every analysis on one cleaned series.

    Returns the JSON-ready block and a dict of tabular artifacts
    ``{name: (header, rows)}`` for CSV export.
    """
    N = len(series)
    artifacts = {}

    dc = config.dfa
    scales = default_scales(N, dc.scale_count, dc.scale_min, dc.scale_max)
    curve = fluctuation_function(integrate_profile(series), scales, both_ends=dc.both_ends)
    exps = local_exponents(curve, dc.bins_per_decade)
    summary = summary_exponents(exps)
    artifacts["fluctuation"] = (("n", "F"), zip(curve.scales.tolist(), curve.F.tolist()))
    artifacts["alpha"] = (
        ("bin_center", "alpha", "alpha_err"),
        zip(exps.bin_centers.tolist(), exps.alpha_local.tolist(), exps.alpha_err.tolist()),
    )
    dfa_block = {
        "alpha_mean": summary.alpha_mean,
        "alpha_mean_err": summary.alpha_mean_err,
        "alpha_max": summary.alpha_max,
        "alpha_max_err": summary.alpha_max_err,
        "alpha_max_scale": summary.alpha_max_scale,
        "scale_range": [int(scales[0]), int(scales[-1])],
        "bins": len(exps.alpha_local),
    }

    sc = config.spectral
    spec = periodogram(series, sc.window)
    fit_range = tuple(sc.fit_range) if sc.fit_range else None
    beta = spectral_exponent(spec, fit_range, sc.exclusions, sc.bins_per_decade)
    artifacts["spectrum"] = (("f", "S"), zip(spec.frequencies.tolist(), spec.power.tolist()))
    entries, skipped = [], []
    for period in sc.cycle_periods:
        try:
            entries.extend(detect_cycles(spec, [period]).entries)
        except NumericalError as exc:
            log.info("cycle period %s h skipped: %s", period, exc)
            skipped.append(period)
    spectral_block = {
        "beta": beta.beta,
        "beta_err": beta.beta_err,
        "fit_range": list(beta.fit_range),
        "alpha_theor": beta.alpha_theor,
        "alpha_theor_err": beta.alpha_theor_err,
        "alpha_theor_reference_spread": REFERENCE_ALPHA_THEOR_SPREAD,
        "bins_used": beta.bins_used,
        "window": spec.window,
        "samples_used": spec.samples_used,
        "samples_dropped": spec.samples_dropped,
    }
    cycles_block = {
        "entries": [
            {
                "period": e.period,
                "peak_power": e.peak_power,
                "background_power": e.background_power,
                "significance": e.significance,
            }
            for e in entries
        ],
        "skipped_periods": skipped,
    }

    pc = config.pareto
    ranges = [tuple(r) for r in pc.ranges]
    try:
        hist, low, high = two_range_report(series, ranges, pc.bin_width, pc.weighted)
    except NumericalError as exc:
        log.warning("pareto: %s; reporting both ranges as absent", exc)
        hist, low, high = None, None, None
    estimates = []
    for rng, est in zip(ranges, (low, high)):
        if est is None:
            estimates.append({"range": list(rng), "absent": True})
        else:
            estimates.append({
                "range": list(rng),
                "absent": False,
                "gamma": est.gamma,
                "gamma_err": est.gamma_err,
                "bins_used": est.bins_used,
                "class": classify_moments(est).value,
            })
    if hist is not None:
        artifacts["histogram"] = (("bin_center", "density"),
                                  zip(hist.bin_centers.tolist(), hist.density.tolist()))
    pareto_block = {"bin_width": pc.bin_width, "estimates": estimates}

    ic = config.increments
    inc_blocks = []
    for n in ic.scales:
        n = int(n)
        if N // n < 3:
            inc_blocks.append({"n": n, "skipped": f"fewer than 3 bins of {n} h"})
            continue
        incs = multiscale_increments(series, n)
        pairs = lag_pairs(incs)
        eps = ic.epsilon if ic.epsilon is not None else default_epsilon(incs)
        counts = classify_scenarios(pairs, eps)
        artifacts[f"increments_n{n}"] = (("prev", "curr"), zip(pairs.prev.tolist(), pairs.curr.tolist()))
        block = {
            "n": n,
            "pairs": len(pairs),
            "lag1_correlation": lag1_correlation(incs),
            "scenarios": {
                "I": counts.I,
                "II": counts.II,
                "III": counts.III,
                "IV": counts.IV,
                "unclassified": counts.unclassified,
                "epsilon": counts.epsilon,
            },
        }
        if len(pairs) >= MIN_PAIRS:
            bc = binned_regression(pairs, ic.bin_count, ic.min_occupancy)
            block["binned"] = {
                "clip": bc.clip,
                "q4_slope": _slope(bc.q4_slope),
                "q1_slope": _slope(bc.q1_slope),
                "bins_occupied": int(len(bc.count)),
            }
            artifacts[f"binned_n{n}"] = (
                ("bin_center", "mean_prev", "mean_curr", "count"),
                zip(bc.prev_bin_centers.tolist(), bc.mean_prev.tolist(),
                    bc.mean_curr.tolist(), bc.count.tolist()),
            )
        else:
            block["binned"] = None
        inc_blocks.append(block)

    block = {
        "length": N,
        "dfa": dfa_block,
        "spectral": spectral_block,
        "cycles": cycles_block,
        "pareto": pareto_block,
        "increments": inc_blocks,
    }
    return block, artifacts


def prepare_series(config: AnalysisConfig) -> dict[str, PriceSeries]:
    ic = config.input
    if not ic.path:
        raise DataError("no input path configured", hint="pass --input or set input.path")
    raw = load_csv(ic.path, ic.schema())
    series = clean(raw, ic.gap_policy, ic.max_gap_hours)
    out = {"all": series}
    if config.peak_calendar is not None:
        out["on-peak"], out["off-peak"] = split_peak(series, config.peak_calendar.calendar())
    return out


def build_report(config: AnalysisConfig):
    """Load, clean and analyse the configured input.

    Returns ``(report, artifacts)`` where artifacts maps series label to its
    tabular outputs.
    """
    try:
        all_series = prepare_series(config)
    except PricedynError as exc:
        raise AnalysisFailure("all", exc) from exc
    blocks, artifacts = {}, {}
    for label, series in all_series.items():
        try:
            blocks[label], artifacts[label] = analyze_series(series, config)
        except PricedynError as exc:
            raise AnalysisFailure(label, exc) from exc
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "generated_at": datetime.now(timezone.utc).replace(microsecond=0).isoformat(),
        "market_id": all_series["all"].market_id,
        "config": config.to_dict(),
        "series": blocks,
    }
    return _sanitize(report), artifacts


def _write_table(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def cmd_analyze(config: AnalysisConfig) -> dict:
    """Run the pipeline and write report.json plus CSV artifacts."""
    report, artifacts = build_report(config)
    jsonschema.validate(report, report_schema())
    out = Path(config.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    if "json" in config.output.formats:
        (out / "report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    if "csv" in config.output.formats:
        for label, tables in artifacts.items():
            stem = label.replace("-", "_")
            for name, (header, rows) in tables.items():
                _write_table(out / f"{stem}_{name}.csv", header, rows)
    return report


def load_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc


def _fmt(value, err=None, digits=3) -> str:
    if value is None:
        return "-"
    if err is None:
        return f"{value:.{digits}f}"
    return f"{value:.{digits}f} ± {err:.{digits}f}"


def _rows_for(report: dict) -> dict[str, str]:
    rows = {}
    for label in SERIES_LABELS:
        block = report["series"].get(label)
        if block is None:
            continue
        d, s = block["dfa"], block["spectral"]
        rows[f"{label} <alpha(n)>"] = _fmt(d["alpha_mean"], d["alpha_mean_err"], 2)
        rows[f"{label} [alpha(n)]_max"] = _fmt(d["alpha_max"], d["alpha_max_err"], 2)
        rows[f"{label} beta"] = _fmt(s["beta"], s["beta_err"], 2)
        rows[f"{label} alpha_theor"] = _fmt(s["alpha_theor"], s["alpha_theor_err"], 2)
        for est in block["pareto"]["estimates"]:
            lo, hi = est["range"]
            key = f"{label} gamma [{lo:g}, {hi:g}]"
            rows[key] = "-" if est["absent"] else _fmt(est["gamma"], est["gamma_err"])
        for inc in block["increments"]:
            if "skipped" in inc:
                continue
            q4 = (inc.get("binned") or {}).get("q4_slope")
            rows[f"{label} n={inc['n']} Q4 slope"] = "-" if q4 is None else _fmt(q4["slope"], q4["slope_err"], 2)
            sc = inc["scenarios"]
            rows[f"{label} n={inc['n']} scenarios I/II/III/IV"] = (
                f"{sc['I']}/{sc['II']}/{sc['III']}/{sc['IV']}"
            )
    return rows


def comparison_table(paths) -> tuple[list[str], list[list[str]]]:
    """Side-by-side table of several reports: header and rows.

    Raises:
        DataError: if any report carries a different schema version.
    """
    paths = [Path(p) for p in paths]
    if not paths:
        raise DataError("no reports given")
    reports = [load_report(p) for p in paths]
    bad = [str(p) for p, r in zip(paths, reports) if r.get("schema_version") != SCHEMA_VERSION]
    if bad:
        raise DataError(
            f"schema version mismatch (expected {SCHEMA_VERSION}) in: {', '.join(bad)}",
            hint="re-run analyze with this tool version",
        )
    per_report = [_rows_for(r) for r in reports]
    labels: list[str] = []
    for rows in per_report:
        labels.extend(k for k in rows if k not in labels)
    header = ["quantity"]
    for p, r in zip(paths, reports):
        name = r.get("market_id") or p.stem
        header.append(name if name not in header else f"{name} ({p})")
    body = [[label] + [rows.get(label, "-") for rows in per_report] for label in labels]
    return header, body


def format_text(header, body) -> str:
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    lines = []
    for j, row in enumerate([header] + body):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def format_csv(header, body) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(body)
    return buf.getvalue()
