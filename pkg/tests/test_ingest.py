from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwalk.errors import DomainError, FormatError
from qwalk.ingest import PriceSeries, daily_returns, parse_ohlc_csv, read_ohlc_csv
from qwalk.targets import histogram_from_returns

HEADER = "Date,Open,High,Low,Close,Adj Close,Volume\n"


def row(d, close):
    return f"{d},1,1,1,{close},1,100\n"


def test_two_rows():
    s = parse_ohlc_csv(HEADER + row("2022-01-03", 100) + row("2022-01-04", 101))
    assert len(s) == 2
    assert s.dates == (date(2022, 1, 3), date(2022, 1, 4))
    np.testing.assert_array_equal(s.closes, [100, 101])
    assert s.skipped_rows == 0


def test_null_close_skipped():
    s = parse_ohlc_csv(HEADER + row("2022-01-03", 100) + row("2022-01-04", "null")
                       + row("2022-01-05", 102))
    assert len(s) == 2 and s.skipped_rows == 1


def test_out_of_order_sorted():
    s = parse_ohlc_csv(HEADER + row("2022-01-05", 3) + row("2022-01-03", 1) + row("2022-01-04", 2))
    assert list(s.closes) == [1, 2, 3]
    assert all(a < b for a, b in zip(s.dates, s.dates[1:]))


def test_bytes_with_bom_and_minimal_columns():
    s = parse_ohlc_csv("Close,Date\n5.5,2022-02-01\n".encode("utf-8-sig"))
    assert s.closes[0] == 5.5


def test_missing_column():
    with pytest.raises(FormatError, match="Date and Close"):
        parse_ohlc_csv("Date,Open\n2022-01-03,1\n")


def test_empty_file():
    with pytest.raises(FormatError):
        parse_ohlc_csv("")


@pytest.mark.parametrize("bad, line", [
    (row("2022/01/04", 1), 3),
    (row("2022-01-04", "abc"), 3),
    (row("2022-01-04", -5), 3),
    ("2022-01-04,1\n", 3),
])
def test_row_errors_carry_line_numbers(bad, line):
    with pytest.raises(FormatError, match=f"line {line}:"):
        parse_ohlc_csv(HEADER + row("2022-01-03", 1) + bad)


def test_duplicate_dates():
    with pytest.raises(FormatError, match="duplicate"):
        parse_ohlc_csv(HEADER + row("2022-01-03", 1) + row("2022-01-03", 2))


def test_read_from_path(tmp_path):
    p = tmp_path / "prices.csv"
    p.write_text(HEADER + row("2022-01-03", 100) + row("2022-01-04", 99))
    assert len(read_ohlc_csv(p)) == 2


@pytest.mark.parametrize("closes, expected", [
    ([100, 101], [1.0]),
    ([100, 100, 100], [0.0, 0.0]),
    ([100, 90], [-10.0]),
])
def test_daily_returns(closes, expected):
    dates = [date(2022, 1, 3 + i) for i in range(len(closes))]
    np.testing.assert_allclose(daily_returns(PriceSeries(dates, closes)), expected, atol=1e-12)


def test_log_returns():
    s = PriceSeries([date(2022, 1, 3), date(2022, 1, 4)], [100, 110])
    assert daily_returns(s, log_returns=True)[0] == pytest.approx(100 * np.log(1.1))


def test_returns_need_two_closes():
    with pytest.raises(DomainError):
        daily_returns(PriceSeries([date(2022, 1, 3)], [100]))


def test_series_validation():
    with pytest.raises(DomainError):
        PriceSeries([date(2022, 1, 4), date(2022, 1, 3)], [1, 2])
    with pytest.raises(DomainError):
        PriceSeries([date(2022, 1, 3)], [0])


@settings(max_examples=50, deadline=None)
@given(start=st.dates(date(1990, 1, 1), date(2030, 1, 1)),
       closes=st.lists(st.floats(0.01, 1e6), min_size=2, max_size=80))
def test_round_trip_and_pipeline(start, closes):
    dates = [date.fromordinal(start.toordinal() + i) for i in range(len(closes))]
    s = PriceSeries(dates, closes)
    back = parse_ohlc_csv(s.to_csv())
    assert back == s
    r = daily_returns(back)
    assert r.size == len(closes) - 1
    if r.size >= 2:
        t = histogram_from_returns(r, 16)
        assert abs(t.probs.sum() - 1) < 1e-12
