"""Tick data to a regular intraday grid, and time-of-day volatility adjustment."""
from __future__ import annotations

import csv
import datetime as dt
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DataError, ParameterError, ParseError, ShapeError

log = logging.getLogger(__name__)

HEADER = ("date", "time", "price")


@dataclass(frozen=True)
class Session:
    """Trading session [open, close] in seconds after midnight."""

    open: float = 9.5 * 3600
    close: float = 16.0 * 3600

    def __post_init__(self):
        if not 0 <= self.open < self.close <= 86400:
            raise ParameterError(f"invalid session {self.open}..{self.close}")

    @classmethod
    def parse(cls, text: str) -> "Session":
        """From ``"HH:MM-HH:MM"``."""
        try:
            a, b = text.split("-")
            return cls(parse_time(a), parse_time(b))
        except ValueError as err:
            raise ParameterError(f"session must look like 09:30-16:00, got {text!r}") from err

    @property
    def seconds(self) -> float:
        return self.close - self.open

    def slots(self, frequency_minutes: float) -> int:
        """Number of slots of the given length; it must divide the session."""
        if not frequency_minutes > 0:
            raise ParameterError("frequency must be positive")
        n = self.seconds / (60.0 * frequency_minutes)
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise ParameterError(
                f"{frequency_minutes} minutes does not divide a {self.seconds / 60:g}-minute session"
            )
        return int(round(n))

    def boundaries(self, n: int) -> np.ndarray:
        return self.open + self.seconds * np.arange(n + 1) / n


@dataclass
class IntradayReturns:
    """Log returns on the slot grid, one row per complete day."""

    dates: List[str]
    returns: np.ndarray
    dropped: List[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.returns.shape[1]

    def years(self) -> List[str]:
        return [d[:4] for d in self.dates]


@dataclass(frozen=True)
class DiurnalProfile:
    """Per-slot scale factors with mean(f^2) = 1."""

    factors: np.ndarray


def parse_time(text: str) -> float:
    """``HH:MM`` or ``HH:MM:SS[.fff]`` to seconds after midnight."""
    parts = text.strip().split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad time {text!r}")
    h, m = int(parts[0]), int(parts[1])
    s = float(parts[2]) if len(parts) == 3 else 0.0
    if not (0 <= h <= 24 and 0 <= m < 60 and 0 <= s < 60) or not math.isfinite(s):
        raise ValueError(f"bad time {text!r}")
    return 3600.0 * h + 60.0 * m + s


def format_time(seconds: float) -> str:
    whole = int(round(seconds))
    return f"{whole // 3600:02d}:{whole % 3600 // 60:02d}:{whole % 60:02d}"


def read_ticks(path) -> List[Tuple[str, List[Tuple[float, float]]]]:
    """Validated ticks grouped by date, in file order.

    Within a date timestamps must be strictly increasing; a date may not
    reappear after another date has started.
    """
    days: List[Tuple[str, List[Tuple[float, float]]]] = []
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return days
        if tuple(h.strip().lower() for h in header) != HEADER:
            raise ParseError(f"expected header {','.join(HEADER)}, got {','.join(header)}", 1)
        last_t = None
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line)
            date, time, price = (c.strip() for c in row)
            try:
                dt.date.fromisoformat(date)
                t = parse_time(time)
                p = float(price)
            except ValueError as err:
                raise ParseError(str(err), line) from err
            if not math.isfinite(p) or p <= 0.0:
                raise DataError(f"price must be positive, got {price}", line)
            if not days or days[-1][0] != date:
                if date in seen:
                    raise DataError(f"date {date} reappears out of order", line)
                seen.add(date)
                days.append((date, []))
                last_t = None
            if last_t is not None and t <= last_t:
                kind = "duplicate" if t == last_t else "out-of-order"
                raise DataError(f"{kind} timestamp {date} {time}", line)
            last_t = t
            days[-1][1].append((t, p))
    return days


def _resample_day(ticks, bounds: np.ndarray) -> Optional[np.ndarray]:
    """Last price at or before each boundary; None if some slot has no tick."""
    t = np.array([x[0] for x in ticks])
    p = np.array([x[1] for x in ticks])
    idx = np.searchsorted(t, bounds, side="right") - 1
    if idx[0] < 0:
        return None
    # every slot (b_{s-1}, b_s] needs a fresh tick
    if np.any(np.diff(idx) == 0):
        return None
    return p[idx]


def ingest_csv(path, frequency: float = 5.0, session: Session = Session()) -> IntradayReturns:
    """Per-day log returns on a grid of ``frequency``-minute slots.

    Prices are sampled with the last tick at or before each slot boundary.
    Days where some slot has no tick are dropped and listed in ``dropped``.
    """
    n = session.slots(frequency)
    bounds = session.boundaries(n)
    days = read_ticks(path)
    if not days:
        warnings.warn(f"{path}: no ticks found", stacklevel=2)
        return IntradayReturns([], np.empty((0, n)))
    dates, rows, dropped = [], [], []
    for date, ticks in days:
        prices = _resample_day(ticks, bounds)
        if prices is None:
            dropped.append(date)
            continue
        dates.append(date)
        rows.append(returns_from_prices(prices))
    if dropped:
        log.warning("dropped %d day(s) with missing slots: %s", len(dropped), ", ".join(dropped))
    ret = np.vstack(rows) if rows else np.empty((0, n))
    return IntradayReturns(dates, ret, dropped)


def returns_from_prices(prices) -> np.ndarray:
    return np.diff(np.log(np.asarray(prices, dtype=float)), axis=-1)


def prices_from_returns(returns, p0: float = 100.0) -> np.ndarray:
    """Price levels (days, n+1) whose log returns are ``returns``, each day starting at p0."""
    r = np.atleast_2d(np.asarray(returns, dtype=float))
    logp = math.log(p0) + np.concatenate([np.zeros((r.shape[0], 1)), np.cumsum(r, axis=1)], axis=1)
    return np.exp(logp)


def business_dates(count: int, start: str = "2001-01-02") -> List[str]:
    """``count`` consecutive weekdays from ``start`` as ISO strings."""
    out, d = [], dt.date.fromisoformat(start)
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d.isoformat())
        d += dt.timedelta(days=1)
    return out


def write_prices_csv(path, prices, dates: Sequence[str], session: Session = Session()) -> None:
    """One tick exactly at every slot boundary; prices written with repr so they round-trip."""
    prices = np.atleast_2d(prices)
    if len(dates) != prices.shape[0]:
        raise ShapeError("need one date per row of prices")
    bounds = session.boundaries(prices.shape[1] - 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HEADER)
        for date, row in zip(dates, prices):
            for t, p in zip(bounds, row):
                w.writerow([date, format_time(t), repr(float(p))])


def diurnal_adjust(returns) -> Tuple[np.ndarray, DiurnalProfile]:
    """Divide each slot by its root-mean-square across days, rescaled so mean(f^2) = 1."""
    r = np.asarray(returns, dtype=float)
    if r.ndim != 2:
        raise ShapeError(f"expected a (days, n) matrix, got shape {r.shape}")
    if r.shape[0] < 2:
        raise DataError(f"diurnal adjustment needs at least 2 days, got {r.shape[0]}")
    ms = np.mean(r * r, axis=0)
    zero = np.flatnonzero(ms == 0.0)
    if zero.size:
        raise DataError(f"slot(s) {', '.join(str(s + 1) for s in zero)} have all-zero returns")
    f = np.sqrt(ms / ms.mean())
    return r / f, DiurnalProfile(f)
