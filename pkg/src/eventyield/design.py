"""Regression sample and design matrix with window-day fixed effects.

Overlapping windows are handled additively: a row's entry in column
(group, s) counts the events of that group whose relative day s falls on
the row's date, so shared days load on every window they belong to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from enum import Enum

import numpy as np

from .errors import DesignError
from .events import EventSet, GroupAssignment
from .series import ReturnSeries, relative_day_index

# Singular values below RANK_TOL x largest are treated as zero.
RANK_TOL = 1e-10


class Estimator(Enum):
    OLS = "ols"
    LAD = "lad"


@dataclass(frozen=True)
class StudySpec:
    """Event-study settings: window half-width W, event groups (one pooled
    set or a two-group assignment), estimator, and HAC lag length."""

    window: int
    groups: GroupAssignment | EventSet
    estimator: Estimator = Estimator.OLS
    hac_lags: int = 30

    def __post_init__(self):
        if self.window < 1:
            raise DesignError("window must be >= 1")
        if self.hac_lags < 0:
            raise DesignError("hac_lags must be >= 0")

    def group_sets(self) -> list[tuple[str, EventSet]]:
        if isinstance(self.groups, GroupAssignment):
            return [
                (self.groups.label_a, self.groups.group_a),
                (self.groups.label_b, self.groups.group_b),
            ]
        return [("All", self.groups)]


@dataclass(frozen=True)
class DesignMatrix:
    """Rows are daily returns from W positions before the first event to W
    after the last; columns are per-group relative-day counts in blocks
    [g0: -W..+W][g1: -W..+W] followed by a constant column of ones."""

    row_dates: tuple[date, ...]
    response: np.ndarray
    matrix: np.ndarray
    window: int
    group_labels: tuple[str, ...]

    def __post_init__(self):
        for name in ("response", "matrix"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def block_width(self) -> int:
        return 2 * self.window + 1

    def group_index(self, group: str) -> int:
        try:
            return self.group_labels.index(group)
        except ValueError:
            raise DesignError(f"unknown group {group!r}; have {self.group_labels}") from None

    def column_index(self, group: str | int, s: int) -> int:
        """Stable column position of the (group, relative day s) dummy."""
        if not -self.window <= s <= self.window:
            raise DesignError(f"relative day {s} outside [-{self.window}, {self.window}]")
        g = group if isinstance(group, int) else self.group_index(group)
        if not 0 <= g < len(self.group_labels):
            raise DesignError(f"group index {g} out of range")
        return g * self.block_width + (s + self.window)

    @property
    def constant_index(self) -> int:
        return len(self.group_labels) * self.block_width


def build_design(returns: ReturnSeries, spec: StudySpec) -> DesignMatrix:
    """Build the window-day fixed-effect design over ``returns``.

    Every event's full +-W window must lie inside the return calendar;
    rows between event windows are retained (they identify the constant).
    Perfect collinearity is detected and raised rather than dropped.
    """
    cal = returns.calendar
    w = spec.window
    groups = spec.group_sets()
    positions: list[list[int]] = []
    for label, events in groups:
        if isinstance(spec.groups, EventSet) and len(events) == 0:
            raise DesignError("empty event set")
        pos = []
        for e in events:
            if e.date not in cal:
                raise DesignError(
                    f"event {e.name} date {e.date} not on the return calendar; align first"
                )
            p = cal.position(e.date)
            if p - w < 0 or p + w >= len(cal):
                raise DesignError(
                    f"event {e.name} on {e.date}: +-{w} day window leaves the calendar"
                )
            pos.append(p)
        positions.append(pos)
    all_pos = [p for ps in positions for p in ps]
    if not all_pos:
        raise DesignError("empty event set")

    start = min(all_pos) - w
    end = max(all_pos) + w
    n_rows = end - start + 1
    width = 2 * w + 1
    n_cols = len(groups) * width + 1
    x = np.zeros((n_rows, n_cols))
    for g, pos in enumerate(positions):
        for p in pos:
            for s in range(-w, w + 1):
                x[p + s - start, g * width + (s + w)] += 1.0
    x[:, -1] = 1.0

    dm = DesignMatrix(
        row_dates=cal.dates[start : end + 1],
        response=returns.returns[start : end + 1],
        matrix=x,
        window=w,
        group_labels=tuple(label for label, _ in groups),
    )
    if matrix_rank(x) < n_cols:
        raise DesignError("design matrix is perfectly collinear")
    return dm


def matrix_rank(x: np.ndarray) -> int:
    """Rank by singular values against RANK_TOL x the largest."""
    sv = np.linalg.svd(x, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > RANK_TOL * sv[0]))
