"""Yahoo-style OHLC CSV parsing and close-to-close returns."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import DomainError, FormatError

log = logging.getLogger(__name__)

NULL_TOKENS = {"", "null", "nan", "na", "n/a", "none"}


@dataclass(frozen=True, eq=False)
class PriceSeries:
    dates: tuple
    closes: np.ndarray
    skipped_rows: int = field(default=0, compare=False)

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        if len(self.dates) != closes.size:
            raise DomainError(f"{len(self.dates)} dates for {closes.size} closes")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DomainError("dates must be strictly increasing")
        if np.any(closes <= 0):
            raise DomainError("closes must be positive")
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", closes)

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return self.dates == other.dates and np.array_equal(self.closes, other.closes)

    __hash__ = None

    def __len__(self):
        return self.closes.size

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Date", "Close"])
        for d, c in zip(self.dates, self.closes):
            w.writerow([d.isoformat(), repr(float(c))])
        return buf.getvalue()


def parse_ohlc_csv(content: bytes | str) -> PriceSeries:
    """Parse a CSV with at least ``Date`` and ``Close`` columns.

    Rows whose Close is missing or a null token are skipped and counted in
    ``skipped_rows``; rows are sorted by date afterwards.
    """
    text = content.decode("utf-8-sig") if isinstance(content, (bytes, bytearray)) else content
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError("empty file") from None
    try:
        di, ci = header.index("Date"), header.index("Close")
    except ValueError:
        raise FormatError(f"header must contain Date and Close columns, got {header}", 1) from None

    rows = []
    skipped = 0
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(di, ci):
            raise FormatError(f"expected at least {max(di, ci) + 1} fields, got {len(row)}", lineno)
        raw_date, raw_close = row[di].strip(), row[ci].strip()
        try:
            d = date.fromisoformat(raw_date)
        except ValueError:
            raise FormatError(f"unparseable date {raw_date!r}", lineno) from None
        if raw_close.lower() in NULL_TOKENS:
            skipped += 1
            continue
        try:
            close = float(raw_close)
        except ValueError:
            raise FormatError(f"unparseable close {raw_close!r}", lineno) from None
        if not math.isfinite(close) or close <= 0:
            raise FormatError(f"close must be a positive number, got {raw_close!r}", lineno)
        rows.append((d, close))
    if skipped:
        log.warning("skipped %d rows with missing Close", skipped)
    rows.sort(key=lambda r: r[0])
    dates = [d for d, _ in rows]
    for a, b in zip(dates, dates[1:]):
        if a == b:
            raise FormatError(f"duplicate date {a.isoformat()}")
    return PriceSeries(tuple(dates), np.array([c for _, c in rows]), skipped)


def read_ohlc_csv(path) -> PriceSeries:
    with open(path, "rb") as fh:
        return parse_ohlc_csv(fh.read())


def daily_returns(series: PriceSeries, log_returns: bool = False) -> np.ndarray:
    """Day-over-day change in percent: ``100 * (c_t / c_{t-1} - 1)`` (or ``100 * ln`` ratio)."""
    c = series.closes
    if c.size < 2:
        raise DomainError(f"need at least 2 closes, got {c.size}")
    ratio = c[1:] / c[:-1]
    return 100.0 * (np.log(ratio) if log_returns else ratio - 1.0)
