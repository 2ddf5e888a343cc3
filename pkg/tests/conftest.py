from datetime import date
from pathlib import Path

import numpy as np
import pytest

from eventyield import (
    Event,
    EventSet,
    Openness,
    PriceSeries,
    TradingCalendar,
    Transform,
    weekday_calendar,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def releases_csv() -> str:
    return (DATA / "model_releases.csv").read_text(encoding="utf-8")


@pytest.fixture
def weekday_cal():
    return weekday_calendar(date(2023, 1, 2), 60)


def level_series(values, start=date(2023, 1, 2), asset_id="test"):
    cal = weekday_calendar(start, len(values))
    return PriceSeries(
        asset_id=asset_id, calendar=cal, values=np.asarray(values, dtype=float),
        transform=Transform.LEVEL,
    )


def log_series(values, start=date(2023, 1, 2), asset_id="test"):
    cal = weekday_calendar(start, len(values))
    return PriceSeries(
        asset_id=asset_id, calendar=cal, values=np.asarray(values, dtype=float),
        transform=Transform.LOG,
    )


def make_events(cal: TradingCalendar, positions, openness=None, prefix="ev"):
    """Events at the given calendar positions; openness defaults to OPEN."""
    evs = []
    for i, p in enumerate(positions):
        o = openness[i] if openness is not None else Openness.OPEN
        evs.append(Event(date=cal.dates[p], name=f"{prefix}{i}", openness=o))
    return EventSet(tuple(evs))
