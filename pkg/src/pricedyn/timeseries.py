"""Hourly price series: ingestion, gap cleaning, peak splitting, aggregation.

A :class:`PriceSeries` stores only its start time and cadence; per-sample
timestamps are ``start_time + i * cadence``.  Missing hours found while
loading are kept as NaN markers until :func:`clean` fills them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import (
    BoundaryGap,
    CadenceError,
    DataError,
    DuplicateTimestamp,
    GapError,
    UnparsableRow,
)

GAP_POLICIES = ("linear-interpolate", "carry-forward", "fail")
MAX_FILLABLE_GAP = 6

_MISSING_TOKENS = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Uniformly sampled price record.

    Attributes:
        market_id: Free-form market label.
        start_time: Timestamp of the first sample (naive, UTC).
        values: Prices in currency units per MWh; NaN marks a missing hour.
        cadence: Sampling interval in hours.
    """

    market_id: str
    start_time: datetime
    values: np.ndarray
    cadence: int = 1

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DataError("price values must be one-dimensional")
        if len(values) < 2:
            raise DataError(f"series {self.market_id!r} needs at least 2 samples, got {len(values)}")
        if self.cadence <= 0:
            raise DataError(f"cadence must be positive, got {self.cadence}")
        if np.isinf(values).any():
            raise DataError("price values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_clean(self) -> bool:
        return not np.isnan(self.values).any()

    @property
    def gaps(self) -> list[tuple[int, int]]:
        """Runs of missing samples as ``(start_index, length)`` pairs."""
        missing = np.isnan(self.values).astype(np.int8)
        edges = np.diff(np.concatenate(([0], missing, [0])))
        starts = np.flatnonzero(edges == 1)
        stops = np.flatnonzero(edges == -1)
        return [(int(a), int(b - a)) for a, b in zip(starts, stops)]

    def timestamp(self, i: int) -> datetime:
        return self.start_time + timedelta(hours=i * self.cadence)

    def replace_values(self, values) -> "PriceSeries":
        return PriceSeries(self.market_id, self.start_time, values, self.cadence)


@dataclass(frozen=True)
class PeakCalendar:
    """On-peak hour/weekday sets; everything else is off-peak.

    Hours are hour-beginning indices in local time, weekdays follow Python's
    convention (Monday = 0).  The default is hour-ending 8 through 23 on
    weekdays.
    """

    on_peak_hours: frozenset = field(default_factory=lambda: frozenset(range(7, 23)))
    on_peak_weekdays: frozenset = field(default_factory=lambda: frozenset(range(5)))
    timezone_offset: int = 0

    def __post_init__(self):
        hours = frozenset(int(h) for h in self.on_peak_hours)
        days = frozenset(int(d) for d in self.on_peak_weekdays)
        if not hours:
            raise DataError("on_peak_hours must not be empty")
        if not hours < frozenset(range(24)):
            raise DataError("on_peak_hours must be a strict subset of 0..23")
        if not days or not days <= frozenset(range(7)):
            raise DataError("on_peak_weekdays must be a nonempty subset of 0..6")
        object.__setattr__(self, "on_peak_hours", hours)
        object.__setattr__(self, "on_peak_weekdays", days)
        object.__setattr__(self, "timezone_offset", int(self.timezone_offset))

    def mask(self, series: PriceSeries) -> np.ndarray:
        """Boolean on-peak mask for every sample of ``series``."""
        start = np.datetime64(series.start_time.replace(tzinfo=None), "h")
        hours_since_epoch = (
            start.astype(np.int64)
            + np.arange(len(series), dtype=np.int64) * series.cadence
            + self.timezone_offset
        )
        hour = hours_since_epoch % 24
        # 1970-01-01 was a Thursday (weekday 3)
        weekday = (hours_since_epoch // 24 + 3) % 7
        return np.isin(hour, sorted(self.on_peak_hours)) & np.isin(
            weekday, sorted(self.on_peak_weekdays)
        )


@dataclass(frozen=True, eq=False)
class AggregatedSeries:
    source: PriceSeries
    scale_n: int
    bin_means: np.ndarray


@dataclass(frozen=True)
class CsvSchema:
    time_column: str = "timestamp"
    price_column: str = "price"
    delimiter: str = ","
    market_id: str | None = None


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    try:
        epoch = float(text)
    except ValueError:
        pass
    else:
        if not math.isfinite(epoch):
            raise ValueError(f"invalid epoch seconds {text!r}")
        return datetime.fromtimestamp(epoch, tz=timezone.utc).replace(tzinfo=None)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts


def _parse_price(text: str) -> float:
    if text is None or text.strip().lower() in _MISSING_TOKENS:
        return math.nan
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite price {text!r}")
    return value


def load_csv(path, schema: CsvSchema | None = None) -> PriceSeries:
    """Read an hourly price CSV into a :class:`PriceSeries`.

    Rows may appear in any order.  Hours absent from the file become NaN
    markers (see :attr:`PriceSeries.gaps`) to be handled by :func:`clean`.

    Raises:
        DataError: unreadable file or missing columns.
        UnparsableRow: a timestamp or price cannot be parsed.
        DuplicateTimestamp: two rows share an hour.
        CadenceError: timestamps are not on a whole-hour grid.
    """
    schema = schema or CsvSchema()
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}", hint="check the input path") from exc

    rows: list[tuple[datetime, float, int]] = []
    with handle:
        reader = csv.DictReader(handle, delimiter=schema.delimiter)
        header = reader.fieldnames or []
        for col in (schema.time_column, schema.price_column):
            if col not in header:
                raise DataError(
                    f"{path}: column {col!r} not found in header {header}",
                    hint="set the column names in the CSV schema",
                )
        for record in reader:
            line = reader.line_num
            try:
                ts = _parse_timestamp(record[schema.time_column] or "")
            except (ValueError, OverflowError, OSError) as exc:
                raise UnparsableRow(line, f"bad timestamp: {exc}") from None
            try:
                price = _parse_price(record[schema.price_column])
            except ValueError as exc:
                raise UnparsableRow(line, f"bad price: {exc}") from None
            rows.append((ts, price, line))

    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 rows, found {len(rows)}")

    rows.sort(key=lambda r: r[0])
    t0 = rows[0][0]
    offsets = []
    for (prev, _, _), (ts, _, line) in zip(rows, rows[1:]):
        if ts == prev:
            raise DuplicateTimestamp(line, ts.isoformat())
    for ts, _, line in rows:
        seconds = (ts - t0).total_seconds()
        if seconds % 3600:
            raise CadenceError(
                f"row {line}: timestamp {ts.isoformat()} is not on the hourly grid",
                hint="resample the input to whole hours",
            )
        offsets.append(int(seconds // 3600))

    values = np.full(offsets[-1] + 1, np.nan)
    values[offsets] = [price for _, price, _ in rows]
    return PriceSeries(schema.market_id or path.stem, t0, values, cadence=1)


def write_csv(series: PriceSeries, path, schema: CsvSchema | None = None) -> None:
    """Write ``series`` in the layout :func:`load_csv` reads back."""
    schema = schema or CsvSchema()
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, delimiter=schema.delimiter, lineterminator="\n")
        writer.writerow([schema.time_column, schema.price_column])
        for i, value in enumerate(series.values):
            price = "" if math.isnan(value) else repr(float(value))
            writer.writerow([series.timestamp(i).isoformat(), price])


def clean(
    series: PriceSeries,
    policy: str = "linear-interpolate",
    max_gap: int = MAX_FILLABLE_GAP,
) -> PriceSeries:
    """Fill missing samples according to ``policy``.

    Gaps longer than ``max_gap`` hours are refused under every policy.
    """
    if policy not in GAP_POLICIES:
        raise DataError(f"unknown gap policy {policy!r}; choose one of {GAP_POLICIES}")
    gaps = series.gaps
    if not gaps:
        return series
    if policy == "fail":
        start, length = gaps[0]
        raise GapError(
            f"{len(gaps)} gap(s) present, first at index {start} ({length} h)",
            hint="use the linear-interpolate or carry-forward gap policy",
        )
    for start, length in gaps:
        if length > max_gap:
            raise GapError(
                f"gap of {length} h at index {start} exceeds the {max_gap} h limit",
                hint="split the series around long outages",
            )
    values = series.values.copy()
    missing = np.isnan(values)
    if missing[0]:
        raise BoundaryGap("series starts with a missing sample; nothing to fill from")
    if policy == "linear-interpolate":
        if missing[-1]:
            raise BoundaryGap("series ends with a missing sample; no right bracket")
        idx = np.arange(len(values))
        values[missing] = np.interp(idx[missing], idx[~missing], values[~missing])
    else:
        last = np.maximum.accumulate(np.where(missing, 0, np.arange(len(values))))
        values = values[last]
    return series.replace_values(values)


def _require_clean(series: PriceSeries, op: str) -> None:
    if not series.is_clean:
        raise DataError(f"{op} needs a cleaned series", hint="run clean() first")


def split_peak(series: PriceSeries, cal: PeakCalendar) -> tuple[PriceSeries, PriceSeries]:
    """Partition into on-peak and off-peak series, each re-indexed contiguously."""
    _require_clean(series, "split_peak")
    mask = cal.mask(series)
    parts = []
    for label, sel in (("on-peak", mask), ("off-peak", ~mask)):
        idx = np.flatnonzero(sel)
        if len(idx) < 2:
            raise DataError(f"{label} subset has {len(idx)} samples; series too short to split")
        parts.append(PriceSeries(series.market_id, series.timestamp(int(idx[0])), series.values[idx]))
    return parts[0], parts[1]


def aggregate(series: PriceSeries, n: int) -> AggregatedSeries:
    """Mean over non-overlapping bins of ``n`` samples; the tail remainder is dropped."""
    _require_clean(series, "aggregate")
    N = len(series)
    if not 1 <= n <= N // 2:
        raise DataError(f"aggregation scale {n} outside [1, {N // 2}]")
    m = N // n
    bins = series.values[: m * n].reshape(m, n).mean(axis=1)
    return AggregatedSeries(series, n, bins)
