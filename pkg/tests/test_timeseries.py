from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pricedyn.errors import (
    BoundaryGap,
    CadenceError,
    DataError,
    DuplicateTimestamp,
    GapError,
    UnparsableRow,
)
from pricedyn.timeseries import (
    CsvSchema,
    PeakCalendar,
    PriceSeries,
    aggregate,
    clean,
    load_csv,
    split_peak,
    write_csv,
)

T0 = datetime(2000, 1, 3)  # Monday


def series(values, start=T0):
    return PriceSeries("m", start, values)


def write(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_three_hourly_rows(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n"
                     "2020-01-01T00:00,10\n2020-01-01T01:00,20\n2020-01-01T02:00,30\n")
        s = load_csv(path)
        assert len(s) == 3
        np.testing.assert_array_equal(s.values, [10.0, 20.0, 30.0])
        assert s.start_time == datetime(2020, 1, 1)
        assert s.market_id == "prices"
        assert s.is_clean

    def test_duplicate_timestamp_reports_row(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n"
                     "2020-01-01T00:00,10\n2020-01-01T01:00,20\n2020-01-01T01:00,21\n")
        with pytest.raises(DuplicateTimestamp) as info:
            load_csv(path)
        assert info.value.row == 4
        assert info.value.exit_code == 2

    def test_two_hour_spacing_records_one_gap(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n"
                     "2020-01-01T00:00,10\n2020-01-01T01:00,20\n2020-01-01T03:00,40\n")
        s = load_csv(path)
        assert len(s) == 4
        assert s.gaps == [(2, 1)]
        assert not s.is_clean

    def test_epoch_seconds_and_unsorted_rows(self, tmp_path):
        base = int(datetime(2020, 1, 1).timestamp() - datetime(1970, 1, 1).timestamp())
        path = write(tmp_path, f"t;p\n{base + 3600};2\n{base};1\n{base + 7200};3\n")
        s = load_csv(path, CsvSchema("t", "p", ";", market_id="X"))
        np.testing.assert_array_equal(s.values, [1.0, 2.0, 3.0])
        assert s.start_time == datetime(2020, 1, 1)
        assert s.market_id == "X"

    def test_timezone_aware_timestamps_become_utc(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n2020-01-01T01:00+01:00,1\n2020-01-01T00:00Z,2\n")
        with pytest.raises(DuplicateTimestamp):
            load_csv(path)

    def test_blank_price_is_missing(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n2020-01-01T00:00,1\n2020-01-01T01:00,\n2020-01-01T02:00,3\n")
        assert load_csv(path).gaps == [(1, 1)]

    def test_unparsable_row(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n2020-01-01T00:00,1\n2020-01-01T01:00,abc\n")
        with pytest.raises(UnparsableRow) as info:
            load_csv(path)
        assert info.value.row == 3

    def test_off_grid_timestamp(self, tmp_path):
        path = write(tmp_path, "timestamp,price\n2020-01-01T00:00,1\n2020-01-01T00:30,2\n")
        with pytest.raises(CadenceError):
            load_csv(path)

    def test_missing_column(self, tmp_path):
        path = write(tmp_path, "time,price\n2020-01-01T00:00,1\n2020-01-01T01:00,2\n")
        with pytest.raises(DataError, match="timestamp"):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "absent.csv")

    def test_write_then_load_round_trip(self, tmp_path):
        s = series([1.5, 2.25, np.nan, -3.0, 1e-7])
        write_csv(s, tmp_path / "out.csv")
        back = load_csv(tmp_path / "out.csv", CsvSchema(market_id="m"))
        np.testing.assert_array_equal(back.values, s.values)
        assert back.start_time == s.start_time


class TestPriceSeries:
    def test_values_are_read_only(self):
        s = series([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_rejects_infinite(self):
        with pytest.raises(DataError):
            series([1.0, np.inf])

    def test_rejects_single_sample(self):
        with pytest.raises(DataError):
            series([1.0])


class TestClean:
    def test_linear_interpolate_midpoint(self):
        np.testing.assert_array_equal(clean(series([10, np.nan, 30])).values, [10, 20, 30])

    def test_carry_forward(self):
        out = clean(series([10, np.nan, 30]), "carry-forward")
        np.testing.assert_array_equal(out.values, [10, 10, 30])

    def test_leading_gap_is_boundary_error(self):
        with pytest.raises(BoundaryGap):
            clean(series([np.nan, 20]))

    def test_trailing_gap_interpolate_fails_carry_forward_fills(self):
        with pytest.raises(BoundaryGap):
            clean(series([1, 2, np.nan]))
        np.testing.assert_array_equal(clean(series([1, 2, np.nan]), "carry-forward").values, [1, 2, 2])

    def test_fail_policy(self):
        with pytest.raises(GapError) as info:
            clean(series([1, np.nan, 3]), "fail")
        assert info.value.module == "timeseries-core"

    def test_long_gap_always_rejected(self):
        values = [1.0] + [np.nan] * 7 + [2.0]
        for policy in ("linear-interpolate", "carry-forward"):
            with pytest.raises(GapError):
                clean(series(values), policy)
        assert clean(series([1.0] + [np.nan] * 6 + [8.0])).values[3] == pytest.approx(4.0)

    def test_unknown_policy(self):
        with pytest.raises(DataError):
            clean(series([1, 2]), "magic")

    @settings(max_examples=60, deadline=None)
    @given(
        arrays(np.float64, st.integers(3, 60), elements=st.floats(-1e3, 1e3)),
        st.data(),
        st.sampled_from(["linear-interpolate", "carry-forward"]),
    )
    def test_idempotent(self, values, data, policy):
        holes = data.draw(st.lists(st.integers(1, len(values) - 2), max_size=3))
        values = values.copy()
        values[holes] = np.nan
        once = clean(series(values), policy)
        twice = clean(once, policy)
        np.testing.assert_array_equal(once.values, twice.values)
        assert once.is_clean


class TestPeakCalendar:
    def test_empty_hours_rejected(self):
        with pytest.raises(DataError):
            PeakCalendar(on_peak_hours=frozenset())

    def test_all_hours_rejected(self):
        with pytest.raises(DataError):
            PeakCalendar(on_peak_hours=frozenset(range(24)))

    def test_default_is_sixteen_weekday_hours(self):
        cal = PeakCalendar()
        assert cal.on_peak_hours == frozenset(range(7, 23))
        assert cal.on_peak_weekdays == frozenset(range(5))


def hand_count(start, length, hours, weekdays, offset=0):
    on = 0
    for i in range(length):
        local = start + timedelta(hours=i + offset)
        on += local.hour in hours and local.weekday() in weekdays
    return on, length - on


class TestSplitPeak:
    def test_two_days_fifteen_hours_each(self):
        cal = PeakCalendar(frozenset(range(8, 23)), frozenset(range(7)))
        on, off = split_peak(series(np.arange(48.0)), cal)
        assert (len(on), len(off)) == (30, 18)
        assert on.values[0] == 8.0 and on.start_time == T0 + timedelta(hours=8)

    @pytest.mark.parametrize("start,length,offset", [
        (datetime(2000, 1, 3), 168, 0),
        (datetime(2000, 1, 7), 60, 0),
        (datetime(2000, 1, 1, 13), 168, 0),
        (datetime(2000, 1, 3), 168, -7),
        (datetime(2000, 1, 2, 20), 100, 5),
    ])
    def test_weekday_calendar_matches_hand_count(self, start, length, offset):
        cal = PeakCalendar(timezone_offset=offset)
        on, off = split_peak(series(np.arange(float(length)), start), cal)
        assert (len(on), len(off)) == hand_count(start, length, cal.on_peak_hours,
                                                 cal.on_peak_weekdays, offset)

    def test_full_week_default(self):
        on, off = split_peak(series(np.zeros(168)), PeakCalendar())
        assert (len(on), len(off)) == (80, 88)

    def test_requires_clean(self):
        with pytest.raises(DataError):
            split_peak(series([1, np.nan, 3]), PeakCalendar())

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, st.integers(48, 300), elements=st.floats(-100, 100)),
           st.integers(0, 167))
    def test_partition_multiset(self, values, shift):
        s = series(values, T0 + timedelta(hours=shift))
        on, off = split_peak(s, PeakCalendar(frozenset(range(8, 20)), frozenset(range(7))))
        assert len(on) + len(off) == len(s)
        np.testing.assert_array_equal(np.sort(np.concatenate([on.values, off.values])), np.sort(values))


class TestAggregate:
    def test_pairs(self):
        np.testing.assert_array_equal(aggregate(series([1, 2, 3, 4]), 2).bin_means, [1.5, 3.5])

    def test_remainder_dropped(self):
        np.testing.assert_array_equal(aggregate(series([1, 2, 3, 4, 5]), 2).bin_means, [1.5, 3.5])

    def test_constant(self):
        for n in (1, 3, 7):
            assert np.all(aggregate(series(np.full(21, 4.2)), n).bin_means == 4.2)

    def test_out_of_range(self):
        with pytest.raises(DataError):
            aggregate(series([1, 2, 3, 4]), 3)
        with pytest.raises(DataError):
            aggregate(series([1, 2, 3, 4]), 0)

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.integers(2, 200), elements=st.floats(-1e4, 1e4)))
    def test_unit_scale_is_identity(self, values):
        np.testing.assert_array_equal(aggregate(series(values), 1).bin_means, values)

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, st.integers(4, 200), elements=st.floats(1, 1e4)), st.data())
    def test_mean_preserved(self, values, data):
        n = data.draw(st.integers(1, len(values) // 2))
        agg = aggregate(series(values), n)
        kept = values[: len(agg.bin_means) * n]
        assert agg.bin_means.mean() == pytest.approx(kept.mean(), rel=1e-9)
