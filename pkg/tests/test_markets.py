from __future__ import annotations

import datetime as dt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tzvarnet.errors import DataError
from tzvarnet.markets import (
    AlignmentPolicy,
    Continent,
    align_panel,
    format_close_time,
    load_market_metadata,
    load_returns_csv,
    parse_close_time,
    slice_period,
    write_markets_csv,
    write_returns_csv,
)

from conftest import make_market_set, make_panel

MARKETS_CSV = """id,name,continent,close_est,index_code
US,United States,Americas,4.00p,SPX
JP,Japan,Asia,1.00a,NKY
DE,Germany,Europe,2.00p,DAX
NZ,New Zealand,Asia,0.00a,NESE
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestCloseTimes:
    def test_us_close(self):
        assert parse_close_time("4.00p") == 960

    def test_japan_close(self):
        assert parse_close_time("1.00a") == 60

    @pytest.mark.parametrize(
        "text,minutes",
        [("0.00a", 0), ("11.30a", 690), ("12.00p", 720), ("1.30a", 90), ("10.45a", 645)],
    )
    def test_examples(self, text, minutes):
        assert parse_close_time(text) == minutes

    @pytest.mark.parametrize("bad", ["25.00a", "4.60p", "4:00p", "noon", ""])
    def test_rejects_garbage(self, bad):
        with pytest.raises(ValueError):
            parse_close_time(bad)

    @given(st.integers(min_value=0, max_value=1439))
    def test_format_round_trip(self, minutes):
        assert parse_close_time(format_close_time(minutes)) == minutes


class TestLoadMarketMetadata:
    def test_block_order_and_parsing(self, tmp_path):
        ms = load_market_metadata(write(tmp_path, "m.csv", MARKETS_CSV))
        assert ms.ids == ("JP", "NZ", "DE", "US")  # Asia block first, file order within
        assert ms.markets[0].close_minutes == 60
        assert ms.markets[3].close_minutes == 960
        assert ms.markets[2].continent is Continent.EUROPE

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataError, match="no markets"):
            load_market_metadata(write(tmp_path, "m.csv", "id,name,continent,close_est,index_code\n"))

    def test_unknown_continent(self, tmp_path):
        text = "id,name,continent,close_est,index_code\nUS,United States,Atlantis,4.00p,SPX\n"
        with pytest.raises(DataError, match="Atlantis"):
            load_market_metadata(write(tmp_path, "m.csv", text))

    def test_duplicate_id(self, tmp_path):
        text = (
            "id,name,continent,close_est,index_code\n"
            "US,A,Americas,4.00p,SPX\nUS,B,Americas,4.00p,DJI\n"
        )
        with pytest.raises(DataError, match="duplicate"):
            load_market_metadata(write(tmp_path, "m.csv", text))

    def test_bad_time_names_row(self, tmp_path):
        text = "id,name,continent,close_est,index_code\nUS,United States,Americas,16h,SPX\n"
        with pytest.raises(DataError, match=":2"):
            load_market_metadata(write(tmp_path, "m.csv", text))

    def test_round_trip(self, tmp_path):
        ms = load_market_metadata(write(tmp_path, "m.csv", MARKETS_CSV))
        write_markets_csv(ms, tmp_path / "again.csv")
        again = load_market_metadata(str(tmp_path / "again.csv"))
        assert again == ms


class TestLoadReturns:
    def setup_method(self):
        self.ms = make_market_set()

    def test_full_panel_passthrough(self, tmp_path):
        text = (
            "date,AS1,EU1,AM1\n"
            "2020-01-02,0.01,0.02,0.03\n"
            "2020-01-03,-0.01,0.0,0.005\n"
            "2020-01-06,0.002,0.001,-0.002\n"
        )
        raw = load_returns_csv(write(tmp_path, "r.csv", text), self.ms)
        assert raw.values.shape == (3, 3)
        assert not raw.gap_mask.any()

    def test_columns_reordered(self, tmp_path):
        text = "date,AM1,AS1,EU1\n2020-01-02,3.0,1.0,2.0\n2020-01-03,0,0,0\n"
        raw = load_returns_csv(write(tmp_path, "r.csv", text), self.ms)
        assert raw.values[0].tolist() == [1.0, 2.0, 3.0]

    def test_duplicate_date(self, tmp_path):
        text = "date,AS1,EU1,AM1\n2020-01-02,1,2,3\n2020-01-02,4,5,6\n"
        with pytest.raises(DataError, match="duplicate date"):
            load_returns_csv(write(tmp_path, "r.csv", text), self.ms)

    def test_gap_cell_flagged(self, tmp_path):
        text = "date,AS1,EU1,AM1\n2020-01-02,1,,3\n2020-01-03,1,2,3\n"
        raw = load_returns_csv(write(tmp_path, "r.csv", text), self.ms)
        assert raw.gap_mask[0, 1]
        assert raw.gap_mask.sum() == 1

    def test_schema_mismatch(self, tmp_path):
        text = "date,AS1,EU1\n2020-01-02,1,2\n"
        with pytest.raises(DataError, match="schema"):
            load_returns_csv(write(tmp_path, "r.csv", text), self.ms)
        text = "date,AS1,EU1,AM1,XX\n2020-01-02,1,2,3,4\n"
        with pytest.raises(DataError, match="schema"):
            load_returns_csv(write(tmp_path, "r.csv", text), self.ms)

    def test_non_numeric_cell_names_position(self, tmp_path):
        text = "date,AS1,EU1,AM1\n2020-01-02,1,x,3\n"
        with pytest.raises(DataError, match="EU1"):
            load_returns_csv(write(tmp_path, "r.csv", text), self.ms)

    def test_rows_sorted_by_date(self, tmp_path):
        text = "date,AS1,EU1,AM1\n2020-01-03,4,5,6\n2020-01-02,1,2,3\n"
        raw = load_returns_csv(write(tmp_path, "r.csv", text), self.ms)
        assert raw.dates[0] == dt.date(2020, 1, 2)
        assert raw.values[0].tolist() == [1.0, 2.0, 3.0]


class TestAlign:
    def make_raw(self, tmp_path):
        text = (
            "date,AS1,EU1,AM1\n"
            "2020-01-02,1,2,3\n"
            "2020-01-03,1,2,3\n"
            "2020-01-06,1,,3\n"
            "2020-01-07,1,2,3\n"
            "2020-01-08,1,2,3\n"
        )
        return load_returns_csv(write(tmp_path, "r.csv", text), make_market_set())

    def test_intersect_drops_gap_dates(self, tmp_path):
        panel = align_panel(self.make_raw(tmp_path), AlignmentPolicy.INTERSECT)
        assert panel.n_dates == 4
        assert dt.date(2020, 1, 6) not in panel.dates
        assert panel.gap_mask is None

    def test_zerofill_keeps_all_dates(self, tmp_path):
        panel = align_panel(self.make_raw(tmp_path), AlignmentPolicy.ZERO_FILL)
        assert panel.n_dates == 5
        assert panel.values[2, 1] == 0.0
        assert panel.gap_mask[2, 1]

    def test_all_gap_column_errors(self, tmp_path):
        text = "date,AS1,EU1,AM1\n2020-01-02,1,,3\n2020-01-03,1,,3\n"
        raw = load_returns_csv(write(tmp_path, "r.csv", text), make_market_set())
        with pytest.raises(DataError, match="insufficient aligned sample"):
            align_panel(raw, AlignmentPolicy.INTERSECT)

    def test_intersect_dates_subset_zerofill_dates_equal(self, tmp_path):
        raw = self.make_raw(tmp_path)
        inter = align_panel(raw, AlignmentPolicy.INTERSECT)
        zf = align_panel(raw, AlignmentPolicy.ZERO_FILL)
        assert set(inter.dates) <= set(raw.dates)
        assert zf.dates == raw.dates

    def test_column_order_matches_roster(self, tmp_path):
        panel = align_panel(self.make_raw(tmp_path), AlignmentPolicy.ZERO_FILL)
        assert panel.markets.ids == ("AS1", "EU1", "AM1")


class TestSlicePeriod:
    def test_inclusive_bounds(self):
        panel = make_panel(np.arange(30.0).reshape(10, 3))
        sliced = slice_period(panel, panel.dates[2], panel.dates[5])
        assert sliced.dates == panel.dates[2:6]

    def test_identity_slice(self):
        panel = make_panel(np.arange(30.0).reshape(10, 3))
        sliced = slice_period(panel, panel.dates[0], panel.dates[-1])
        assert sliced.dates == panel.dates
        assert np.array_equal(sliced.values, panel.values)

    def test_single_date_errors(self):
        panel = make_panel(np.arange(30.0).reshape(10, 3))
        with pytest.raises(DataError):
            slice_period(panel, panel.dates[3], panel.dates[3])

    def test_start_after_end_rejected(self):
        panel = make_panel(np.arange(30.0).reshape(10, 3))
        with pytest.raises(ValueError):
            slice_period(panel, panel.dates[5], panel.dates[2])

    def test_idempotent(self):
        panel = make_panel(np.arange(60.0).reshape(20, 3))
        once = slice_period(panel, panel.dates[4], panel.dates[15])
        twice = slice_period(once, panel.dates[4], panel.dates[15])
        assert once.dates == twice.dates
        assert np.array_equal(once.values, twice.values)

    def test_bounds_need_not_be_trading_days(self):
        panel = make_panel(np.arange(60.0).reshape(20, 3))
        start = panel.dates[3] + dt.timedelta(days=0)
        sliced = slice_period(panel, start - dt.timedelta(days=1), panel.dates[7])
        assert sliced.dates[0] >= start - dt.timedelta(days=1)

    def test_crisis_period_slice(self):
        # weekday panel spanning 2006-2015, sliced to a mid-2007..early-2009
        # crisis window: inclusive bounds, nothing outside
        ms = make_market_set()
        dates = []
        d = dt.date(2006, 8, 1)
        while d <= dt.date(2015, 12, 31):
            if d.weekday() < 5:
                dates.append(d)
            d += dt.timedelta(days=1)
        from tzvarnet.markets import ReturnsPanel

        panel = ReturnsPanel(dates=tuple(dates), markets=ms, values=np.zeros((len(dates), 3)))
        sliced = slice_period(panel, dt.date(2007, 8, 1), dt.date(2009, 3, 31))
        assert sliced.dates[0] == dt.date(2007, 8, 1)
        assert sliced.dates[-1] == dt.date(2009, 3, 31)
        assert all(dt.date(2007, 8, 1) <= x <= dt.date(2009, 3, 31) for x in sliced.dates)


class TestReturnsRoundTrip:
    def test_write_then_read(self, tmp_path):
        panel = make_panel(np.random.default_rng(1).standard_normal((7, 3)) / 100)
        write_returns_csv(panel, tmp_path / "r.csv")
        raw = load_returns_csv(str(tmp_path / "r.csv"), panel.markets)
        again = align_panel(raw)
        assert again.dates == panel.dates
        assert np.array_equal(again.values, panel.values)
