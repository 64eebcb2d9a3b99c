"""Analysis configuration and its YAML file format.

Every field has a default; :data:`DEFAULT_CONFIG_YAML` is the documented
default file and is kept equal to ``AnalysisConfig().to_dict()`` by the
test suite.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError, PricedynError
from .timeseries import CsvSchema, GAP_POLICIES, MAX_FILLABLE_GAP, PeakCalendar

DEFAULT_CONFIG_YAML = """\
# pricedyn analysis configuration.  Every key is optional; values shown are
# the defaults.  Command-line flags override values from this file.
input:
  path: null                # CSV file with a header row
  time_column: timestamp    # ISO-8601 or epoch seconds
  price_column: price
  delimiter: ','
  market_id: null           # defaults to the file name stem
  gap_policy: linear-interpolate   # linear-interpolate | carry-forward | fail
  max_gap_hours: 6          # longer gaps are always an error
peak_calendar:              # set to null to analyse all hours only
  on_peak_hours: [7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22]
  on_peak_weekdays: [0, 1, 2, 3, 4]   # Monday = 0
  timezone_offset: 0        # hours added to UTC timestamps to get local time
dfa:
  scale_min: 4              # smallest box size, hours
  scale_max: 720            # capped at N/4
  scale_count: 60           # log-spaced integer scales before deduplication
  bins_per_decade: 8        # width of the local-exponent bins
  both_ends: false          # repeat the box partition from the tail
spectral:
  window: none              # none | hann
  fit_range: null           # [f_lo, f_hi] in cycles/hour; null = whole spectrum
  exclusions: [24.0, 168.0] # periods (h) whose lines and harmonics are skipped
  cycle_periods: [24.0, 168.0]
  bins_per_decade: 8
pareto:
  bin_width: 5.0            # currency units
  ranges: [[1.0, 200.0], [200.0, 1000.0]]
  weighted: false           # weight log-log fit by bin counts
increments:
  scales: [1, 12, 24, 168, 720]
  bin_count: 40
  min_occupancy: 10
  epsilon: null             # null = half the median absolute deviation per scale
output:
  directory: pricedyn-out
  formats: [json, csv]
"""


def _check_keys(section: str, cls, data: dict) -> None:
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")


@dataclass
class InputConfig:
    path: str | None = None
    time_column: str = "timestamp"
    price_column: str = "price"
    delimiter: str = ","
    market_id: str | None = None
    gap_policy: str = "linear-interpolate"
    max_gap_hours: int = MAX_FILLABLE_GAP

    def schema(self) -> CsvSchema:
        return CsvSchema(self.time_column, self.price_column, self.delimiter, self.market_id)


@dataclass
class CalendarConfig:
    on_peak_hours: list = field(default_factory=lambda: list(range(7, 23)))
    on_peak_weekdays: list = field(default_factory=lambda: list(range(5)))
    timezone_offset: int = 0

    def calendar(self) -> PeakCalendar:
        return PeakCalendar(frozenset(self.on_peak_hours), frozenset(self.on_peak_weekdays),
                            self.timezone_offset)


@dataclass
class DfaConfig:
    scale_min: int = 4
    scale_max: int = 720
    scale_count: int = 60
    bins_per_decade: int = 8
    both_ends: bool = False


@dataclass
class SpectralConfig:
    window: str = "none"
    fit_range: list | None = None
    exclusions: list = field(default_factory=lambda: [24.0, 168.0])
    cycle_periods: list = field(default_factory=lambda: [24.0, 168.0])
    bins_per_decade: int = 8


@dataclass
class ParetoConfig:
    bin_width: float = 5.0
    ranges: list = field(default_factory=lambda: [[1.0, 200.0], [200.0, 1000.0]])
    weighted: bool = False


@dataclass
class IncrementsConfig:
    scales: list = field(default_factory=lambda: [1, 12, 24, 168, 720])
    bin_count: int = 40
    min_occupancy: int = 10
    epsilon: float | None = None


@dataclass
class OutputConfig:
    directory: str = "pricedyn-out"
    formats: list = field(default_factory=lambda: ["json", "csv"])


_SECTIONS = {
    "input": InputConfig,
    "peak_calendar": CalendarConfig,
    "dfa": DfaConfig,
    "spectral": SpectralConfig,
    "pareto": ParetoConfig,
    "increments": IncrementsConfig,
    "output": OutputConfig,
}


@dataclass
class AnalysisConfig:
    input: InputConfig = field(default_factory=InputConfig)
    peak_calendar: CalendarConfig | None = field(default_factory=CalendarConfig)
    dfa: DfaConfig = field(default_factory=DfaConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    pareto: ParetoConfig = field(default_factory=ParetoConfig)
    increments: IncrementsConfig = field(default_factory=IncrementsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> "AnalysisConfig":
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        _check_keys("top level", cls, data)
        kwargs = {}
        for name, section_cls in _SECTIONS.items():
            if name not in data:
                continue
            value = data[name]
            if value is None:
                if name != "peak_calendar":
                    raise ConfigError(f"section [{name}] cannot be null")
                kwargs[name] = None
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"section [{name}] must be a mapping")
            _check_keys(name, section_cls, value)
            kwargs[name] = section_cls(**value)
        config = cls(**kwargs)
        config.validate()
        return config

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> "AnalysisConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid configuration file: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "AnalysisConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_yaml(text)

    def validate(self) -> None:
        if self.input.gap_policy not in GAP_POLICIES:
            raise ConfigError(f"gap_policy must be one of {GAP_POLICIES}")
        if self.peak_calendar is not None:
            try:
                self.peak_calendar.calendar()
            except PricedynError as exc:
                raise ConfigError(f"peak_calendar: {exc}") from exc
        d = self.dfa
        if d.scale_min < 4 or d.scale_max < d.scale_min or d.scale_count < 3:
            raise ConfigError("dfa scales need 4 <= scale_min <= scale_max and scale_count >= 3")
        if d.bins_per_decade < 2:
            raise ConfigError("dfa.bins_per_decade must be >= 2")
        if self.spectral.window not in ("none", "hann"):
            raise ConfigError("spectral.window must be 'none' or 'hann'")
        if self.spectral.fit_range is not None and len(self.spectral.fit_range) != 2:
            raise ConfigError("spectral.fit_range must be [f_lo, f_hi] or null")
        p = self.pareto
        if p.bin_width <= 0 or len(p.ranges) != 2 or any(len(r) != 2 for r in p.ranges):
            raise ConfigError("pareto needs bin_width > 0 and exactly two [lo, hi] ranges")
        inc = self.increments
        if not inc.scales or any(int(n) < 1 for n in inc.scales):
            raise ConfigError("increments.scales must be positive integers")
        if inc.bin_count < 10:
            raise ConfigError("increments.bin_count must be >= 10")
        if inc.epsilon is not None and inc.epsilon <= 0:
            raise ConfigError("increments.epsilon must be positive or null")
        if set(self.output.formats) - {"json", "csv"}:
            raise ConfigError("output.formats may contain only 'json' and 'csv'")
