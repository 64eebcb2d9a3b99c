"""Command-line entry point: ``pricedyn analyze | synth | report``.

Exit status: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

import yaml

from . import __version__
from .config import AnalysisConfig
from .errors import ConfigError, PricedynError
from .report import cmd_analyze, comparison_table, format_csv, format_text
from .synth import KINDS, GeneratorSpec, gen
from .timeseries import CsvSchema, write_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _param(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), yaml.safe_load(value)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pricedyn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="run all analyses on a price CSV")
    a.add_argument("--config", help="YAML configuration file")
    a.add_argument("--input", help="price CSV (overrides input.path)")
    a.add_argument("--out", help="output directory (overrides output.directory)")
    a.add_argument("--market-id")
    a.add_argument("--time-column")
    a.add_argument("--price-column")
    a.add_argument("--delimiter")
    a.add_argument("--gap-policy", choices=["linear-interpolate", "carry-forward", "fail"])
    a.add_argument("--no-peak-split", action="store_true", help="analyse all hours only")
    a.add_argument("--window", choices=["none", "hann"], help="periodogram taper")
    a.add_argument("--bins-per-decade", type=int, help="DFA local-exponent bins per decade")
    a.add_argument("--pareto-bin-width", type=float)
    a.add_argument("--increment-scales", type=_int_list, help="e.g. 1,12,24,168,720")
    a.add_argument("--epsilon", type=float, help="fixed scenario threshold")
    a.add_argument("--dump-config", action="store_true",
                   help="print the effective configuration as YAML and exit")

    s = sub.add_parser("synth", help="write a synthetic price series as CSV")
    s.add_argument("--kind", choices=KINDS)
    s.add_argument("--spec", help="YAML file with kind/params/seed/length")
    s.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
    s.add_argument("--seed", type=int)
    s.add_argument("--length", type=int)
    s.add_argument("--start", type=datetime.fromisoformat, help="first timestamp (ISO-8601)")
    s.add_argument("--market-id")
    s.add_argument("--out", required=True, help="destination CSV")

    r = sub.add_parser("report", help="compare several report.json files side by side")
    r.add_argument("reports", nargs="+")
    r.add_argument("--csv", help="also write the table as CSV here")
    return parser


def _analysis_config(args) -> AnalysisConfig:
    config = AnalysisConfig.load(args.config) if args.config else AnalysisConfig()
    ic = config.input
    for attr, flag in (("path", "input"), ("market_id", "market_id"), ("time_column", "time_column"),
                       ("price_column", "price_column"), ("delimiter", "delimiter"),
                       ("gap_policy", "gap_policy")):
        value = getattr(args, flag)
        if value is not None:
            setattr(ic, attr, value)
    if args.out:
        config.output.directory = args.out
    if args.no_peak_split:
        config.peak_calendar = None
    if args.window:
        config.spectral.window = args.window
    if args.bins_per_decade is not None:
        config.dfa.bins_per_decade = args.bins_per_decade
    if args.pareto_bin_width is not None:
        config.pareto.bin_width = args.pareto_bin_width
    if args.increment_scales:
        config.increments.scales = args.increment_scales
    if args.epsilon is not None:
        config.increments.epsilon = args.epsilon
    config.validate()
    return config


def _generator_spec(args) -> GeneratorSpec:
    fields = {}
    if args.spec:
        try:
            fields = yaml.safe_load(Path(args.spec).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read generator spec {args.spec}: {exc}") from exc
        unknown = set(fields) - {"kind", "params", "seed", "length", "market_id", "start_time"}
        if unknown:
            raise ConfigError(f"unknown generator spec key(s): {sorted(unknown)}")
    params = dict(fields.get("params") or {})
    params.update(dict(args.param))
    kind = args.kind or fields.get("kind")
    if kind is None:
        raise ConfigError("generator kind missing; pass --kind or a --spec file")
    spec = GeneratorSpec(
        kind=kind,
        params=params,
        seed=args.seed if args.seed is not None else int(fields.get("seed", 0)),
        length=args.length if args.length is not None else int(fields.get("length", 4096)),
        market_id=args.market_id or fields.get("market_id", "synthetic"),
        start_time=args.start or fields.get("start_time", GeneratorSpec.start_time),
    )
    spec.resolved_params()
    return spec


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "analyze":
            config = _analysis_config(args)
            if args.dump_config:
                sys.stdout.write(config.to_yaml())
                return EXIT_OK
            report = cmd_analyze(config)
            print(f"wrote {Path(config.output.directory) / 'report.json'} "
                  f"({', '.join(report['series'])})")
        elif args.command == "synth":
            spec = _generator_spec(args)
            write_csv(gen(spec), args.out, CsvSchema())
        else:
            header, body = comparison_table(args.reports)
            sys.stdout.write(format_text(header, body))
            if args.csv:
                Path(args.csv).write_text(format_csv(header, body), encoding="utf-8")
    except PricedynError as exc:
        print(f"error: [{exc.module}] {exc}", file=sys.stderr)
        if exc.hint:
            print(f"hint: {exc.hint}", file=sys.stderr)
        return exc.exit_code
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
