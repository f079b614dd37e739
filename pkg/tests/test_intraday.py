import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from locgauss.errors import DataError, ParameterError, ParseError
from locgauss.intraday import (
    Session,
    business_dates,
    diurnal_adjust,
    ingest_csv,
    parse_time,
    prices_from_returns,
    returns_from_prices,
    write_prices_csv,
)

TINY = Session(parse_time("09:30"), parse_time("09:40"))


def write(tmp_path, body, name="t.csv"):
    p = tmp_path / name
    p.write_text("date,time,price\n" + body)
    return p


def test_three_boundary_ticks(tmp_path):
    p = write(tmp_path, "2020-01-02,09:30,100\n2020-01-02,09:35,101\n2020-01-02,09:40,100\n")
    out = ingest_csv(p, 5, TINY)
    assert out.dates == ["2020-01-02"]
    assert_allclose(out.returns, [[math.log(1.01), math.log(100 / 101)]], rtol=0, atol=1e-15)


def test_last_tick_rule(tmp_path):
    body = ("2020-01-02,09:29:50,99\n2020-01-02,09:33,100\n2020-01-02,09:34:59,102\n"
            "2020-01-02,09:35:01,1000\n2020-01-02,09:39,104\n")
    out = ingest_csv(write(tmp_path, body), 5, TINY)
    assert_allclose(out.returns[0], [math.log(102 / 99), math.log(104 / 102)])


def test_days_with_missing_slots_dropped(tmp_path, caplog):
    body = ("2020-01-02,09:30,100\n2020-01-02,09:35,101\n2020-01-02,09:40,100\n"
            "2020-01-03,09:30,100\n2020-01-03,09:40,100\n")
    out = ingest_csv(write(tmp_path, body), 5, TINY)
    assert out.dates == ["2020-01-02"] and out.dropped == ["2020-01-03"]
    assert "dropped 1 day" in caplog.text


def test_empty_file_warns(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    with pytest.warns(UserWarning):
        out = ingest_csv(p, 5, TINY)
    assert out.returns.shape == (0, 2)


@pytest.mark.parametrize("body,cls,line", [
    ("2020-01-02,09:30,100\n2020-01-02,09:30,101\n", DataError, 3),
    ("2020-01-02,09:31,100\n2020-01-02,09:30,101\n", DataError, 3),
    ("2020-01-02,09:30,-1\n", DataError, 2),
    ("2020-01-02,09:30,0\n", DataError, 2),
    ("2020-01-02,09:30,abc\n", ParseError, 2),
    ("2020-01-02,9h30,100\n", ParseError, 2),
    ("2020-13-02,09:30,100\n", ParseError, 2),
    ("2020-01-02,09:30\n", ParseError, 2),
    ("2020-01-02,09:30,1\n2020-01-03,09:30,1\n2020-01-02,09:35,1\n", DataError, 4),
])
def test_bad_rows_name_the_line(tmp_path, body, cls, line):
    with pytest.raises(cls, match=f"line {line}:"):
        ingest_csv(write(tmp_path, body), 5, TINY)


def test_bad_header(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("day,time,px\n")
    with pytest.raises(ParseError, match="line 1"):
        ingest_csv(p, 5, TINY)


def test_session_slots():
    assert Session().slots(5) == 78
    assert Session.parse("09:30-16:00").slots(2) == 195
    with pytest.raises(ParameterError):
        Session().slots(7)
    with pytest.raises(ParameterError):
        Session.parse("nine-to-five")


def test_price_round_trip_is_exact(tmp_path, rng):
    r = rng.standard_normal((3, 78)) * 0.001
    prices = prices_from_returns(r)
    write_prices_csv(tmp_path / "p.csv", prices, business_dates(3))
    back = ingest_csv(tmp_path / "p.csv", 5)
    assert back.returns.tobytes() == returns_from_prices(prices).tobytes()
    assert_allclose(back.returns, r, atol=1e-12)


def test_business_dates_skip_weekends():
    assert business_dates(3, "2021-01-01") == ["2021-01-01", "2021-01-04", "2021-01-05"]


def test_diurnal_flat_profile():
    r = np.array([[0.1, -0.1, 0.1], [-0.1, 0.1, 0.1]])
    adj, prof = diurnal_adjust(r)
    assert_array_equal(prof.factors, 1.0)
    assert_array_equal(adj, r)


def test_diurnal_doubling_first_slot():
    # slot mean squares 4 and 1; normalized by their mean 2.5
    r = np.array([[2.0, 1.0], [-2.0, -1.0]])
    _, prof = diurnal_adjust(r)
    assert_allclose(prof.factors, [math.sqrt(4 / 2.5), math.sqrt(1 / 2.5)], rtol=1e-15)
    assert_allclose(prof.factors[0] / prof.factors[1], 2.0, rtol=1e-15)


def test_diurnal_equalizes_slots(rng):
    r = rng.standard_normal((30, 40)) * np.linspace(0.5, 3, 40)
    adj, prof = diurnal_adjust(r)
    ms = np.mean(adj * adj, axis=0)
    assert np.max(np.abs(ms - ms[0])) < 1e-12
    assert abs(np.mean(prof.factors**2) - 1.0) < 1e-12
    assert np.all(prof.factors > 0)


def test_diurnal_errors():
    with pytest.raises(DataError):
        diurnal_adjust(np.ones((1, 5)))
    with pytest.raises(DataError, match="slot"):
        diurnal_adjust(np.array([[0.0, 1.0], [0.0, 2.0]]))
