"""Parsers for the published CSV shapes: FRED yield series, OHLC equity
files, event tables, and forecast series.

All parsers reject malformed rows with a diagnosed row number rather than
repairing them.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date, datetime

import numpy as np

from .errors import IngestError
from .events import Event, EventSet, Openness
from .series import PriceSeries, TradingCalendar, Transform

_EPOCH = date(1970, 1, 1)

EVENT_COLUMNS = ("date", "model", "open", "lab", "country", "arena_score", "frontier_gap", "agi_shift")


@dataclass(frozen=True)
class RawTable:
    """A parsed CSV: header plus string cells, every row with header arity."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]


def read_table(text: str) -> RawTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty input") from None
    header = tuple(h.strip() for h in header)
    rows = []
    for i, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue  # trailing blank line
        if len(row) != len(header):
            raise IngestError(f"expected {len(header)} cells, got {len(row)}", row=i)
        rows.append(tuple(c.strip() for c in row))
    return RawTable(header=header, rows=tuple(rows))


def _parse_date(cell: str, row: int) -> date:
    """ISO-8601 or MM/DD/YYYY."""
    for fmt in ("%Y-%m-%d", "%m/%d/%Y"):
        try:
            return datetime.strptime(cell, fmt).date()
        except ValueError:
            continue
    raise IngestError(f"unparseable date {cell!r}", row=row)


def _parse_value(cell: str, row: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise IngestError(f"non-numeric value {cell!r}", row=row) from None


def _check_order(dates: list[date], rownums: list[int]):
    for (a, b), rn in zip(zip(dates, dates[1:]), rownums[1:]):
        if a >= b:
            raise IngestError(f"dates out of order or duplicated at {b}", row=rn)


def parse_fred_csv(text: str) -> PriceSeries:
    """FRED shape: a date column then one value column; '.' marks a missing
    observation and the row is dropped.  Transform is Level (yields in
    percent)."""
    table = read_table(text)
    if len(table.header) != 2:
        raise IngestError(f"expected 2 columns, got {len(table.header)}")
    series_id = table.header[1]
    dates: list[date] = []
    values: list[float] = []
    rownums: list[int] = []
    for i, row in enumerate(table.rows, start=2):
        if row[1] == ".":
            continue
        dates.append(_parse_date(row[0], i))
        values.append(_parse_value(row[1], i))
        rownums.append(i)
    if not dates:
        raise IngestError("no observations after dropping missing values")
    _check_order(dates, rownums)
    return PriceSeries(
        asset_id=series_id,
        calendar=TradingCalendar(tuple(dates)),
        values=np.array(values),
        transform=Transform.LEVEL,
    )


def parse_ohlc_csv(text: str, asset_id: str = "equity") -> PriceSeries:
    """Yahoo-style OHLC shape; consumes the ``Adj Close`` column, log
    transform."""
    table = read_table(text)
    lower = [h.lower() for h in table.header]
    if "date" not in lower:
        raise IngestError("missing Date column")
    if "adj close" not in lower:
        raise IngestError("missing Adj Close column")
    date_col = lower.index("date")
    close_col = lower.index("adj close")
    dates: list[date] = []
    values: list[float] = []
    rownums: list[int] = []
    for i, row in enumerate(table.rows, start=2):
        d = _parse_date(row[date_col], i)
        v = _parse_value(row[close_col], i)
        if v <= 0:
            raise IngestError(f"non-positive price {v}", row=i)
        dates.append(d)
        values.append(v)
        rownums.append(i)
    if not dates:
        raise IngestError("no price rows")
    _check_order(dates, rownums)
    return PriceSeries(
        asset_id=asset_id,
        calendar=TradingCalendar(tuple(dates)),
        values=np.array(values),
        transform=Transform.LOG,
    )


_NUMERIC_ATTRS = ("arena_score", "frontier_gap", "agi_shift")
_TEXT_ATTRS = ("lab", "country")


def parse_event_table(text: str) -> EventSet:
    """Event CSV: mandatory date, model, open columns; the open marker is
    'x' for open-weight and empty for closed, mirroring the published list.
    Optional attribute columns: lab, country, arena_score, frontier_gap,
    agi_shift (empty cells omitted)."""
    table = read_table(text)
    lower = [h.lower() for h in table.header]
    for col in ("date", "model", "open"):
        if col not in lower:
            raise IngestError(f"missing mandatory column {col!r}")
    idx = {name: lower.index(name) for name in lower}
    events = []
    for i, row in enumerate(table.rows, start=2):
        d = _parse_date(row[idx["date"]], i)
        name = row[idx["model"]]
        marker = row[idx["open"]].lower()
        if marker == "x":
            openness = Openness.OPEN
        elif marker == "":
            openness = Openness.CLOSED
        else:
            raise IngestError(f"unknown openness token {row[idx['open']]!r}", row=i)
        attributes: dict[str, float | str] = {}
        for attr in _TEXT_ATTRS:
            if attr in idx and row[idx[attr]]:
                attributes[attr] = row[idx[attr]]
        for attr in _NUMERIC_ATTRS:
            if attr in idx and row[idx[attr]]:
                attributes[attr] = _parse_value(row[idx[attr]], i)
        events.append(Event(date=d, name=name, openness=openness, attributes=attributes))
    return EventSet(tuple(events))


def parse_forecast_series(text: str) -> PriceSeries:
    """Forecast table: date column plus median-forecast column.  Forecast
    values may be dates (converted to real days since 1970-01-01) or
    already-numeric day counts; '.' rows are dropped as in the FRED shape."""
    table = read_table(text)
    if len(table.header) != 2:
        raise IngestError(f"expected 2 columns, got {len(table.header)}")
    dates: list[date] = []
    values: list[float] = []
    rownums: list[int] = []
    for i, row in enumerate(table.rows, start=2):
        if row[1] == ".":
            continue
        d = _parse_date(row[0], i)
        cell = row[1]
        try:
            v = float(cell)
        except ValueError:
            v = float((_parse_date(cell, i) - _EPOCH).days)
        dates.append(d)
        values.append(v)
        rownums.append(i)
    if not dates:
        raise IngestError("no observations after dropping missing values")
    _check_order(dates, rownums)
    return PriceSeries(
        asset_id=table.header[1],
        calendar=TradingCalendar(tuple(dates)),
        values=np.array(values),
        transform=Transform.LEVEL,
    )
