"""Daily index paths and the per-observation quantities the payoff rules use.

The payoff of the note depends on three things derived from a path of daily
closing levels: the cumulative return on each observation date, the running
minimum cumulative return through each observation date, and whether any
daily close ever fell below the trigger level.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable

from .terms import NoteTerms

__all__ = [
    "IndexPath",
    "ObservationView",
    "MissingObservationDateError",
    "PriceSeriesError",
    "cumulative_returns",
    "observe",
    "breach_date",
    "load_price_rows",
    "load_index_path_csv",
]


class PriceSeriesError(ValueError):
    """A prices CSV is malformed (bad header, bad row, or out of order)."""


class MissingObservationDateError(ValueError):
    """An observation date has no entry in the path.

    There is deliberately no interpolation or nearest-date fallback: the
    payoff is discontinuous in the close, so a silently substituted level
    could flip the outcome. Replay inputs must contain the exact dates.
    """

    def __init__(self, date: dt.date):
        self.date = date
        super().__init__(f"path has no entry for observation date {date.isoformat()}")


@dataclass(frozen=True)
class IndexPath:
    """Daily closing levels together with the contractual starting level."""

    entries: tuple[tuple[dt.date, float], ...]
    start_level: float

    def __post_init__(self):
        if not self.entries:
            raise ValueError("path must contain at least one entry")
        if not (math.isfinite(self.start_level) and self.start_level > 0):
            raise ValueError("start level must be a positive finite number")
        prev: dt.date | None = None
        for date, close in self.entries:
            if not (math.isfinite(close) and close > 0):
                raise ValueError(f"close on {date.isoformat()} must be positive")
            if prev is not None and date <= prev:
                raise ValueError(f"entry dates must be strictly increasing at {date.isoformat()}")
            prev = date

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(d for d, _ in self.entries)

    @property
    def closes(self) -> tuple[float, ...]:
        return tuple(c for _, c in self.entries)


@dataclass(frozen=True)
class ObservationView:
    """Per-observation returns and running minima: all the payoff rules need.

    ``index_returns[r]`` is the cumulative return on observation date r and
    ``running_minima[r]`` the minimum cumulative daily return over every
    trading day up to and including that date. Dates are optional metadata;
    simulated scenarios omit them.
    """

    index_returns: tuple[float, ...]
    running_minima: tuple[float, ...]
    dates: tuple[dt.date, ...] | None = None

    def __post_init__(self):
        if not self.index_returns:
            raise ValueError("view must contain at least one observation")
        if len(self.running_minima) != len(self.index_returns):
            raise ValueError("index_returns and running_minima must have equal length")
        if self.dates is not None and len(self.dates) != len(self.index_returns):
            raise ValueError("dates must match the number of observations")
        for ret, run in zip(self.index_returns, self.running_minima):
            if run > ret:
                raise ValueError("running minimum cannot exceed the observation return")
        for a, b in zip(self.running_minima, self.running_minima[1:]):
            if b > a:
                raise ValueError("running minima must be nonincreasing")

    @property
    def d_min(self) -> float:
        """Minimum cumulative daily return over the whole observation period."""
        return self.running_minima[-1]


def cumulative_returns(path: IndexPath) -> list[float]:
    """Cumulative return of each entry relative to the starting level."""
    start = path.start_level
    return [(close - start) / start for _, close in path.entries]


def observe(path: IndexPath, terms: NoteTerms) -> ObservationView:
    """Project a daily path onto the note's observation schedule.

    Every observation date must be present in the path exactly; a missing
    date raises :class:`MissingObservationDateError`.
    """
    returns = cumulative_returns(path)
    prefix_min: list[float] = []
    running = math.inf
    for value in returns:
        running = min(running, value)
        prefix_min.append(running)

    index_of = {date: i for i, (date, _) in enumerate(path.entries)}
    obs_returns: list[float] = []
    obs_minima: list[float] = []
    for obs_date in terms.observation_dates:
        i = index_of.get(obs_date)
        if i is None:
            raise MissingObservationDateError(obs_date)
        obs_returns.append(returns[i])
        obs_minima.append(prefix_min[i])
    return ObservationView(
        index_returns=tuple(obs_returns),
        running_minima=tuple(obs_minima),
        dates=terms.observation_dates,
    )


def breach_date(path: IndexPath, terms: NoteTerms) -> dt.date | None:
    """First date whose close breaches the trigger, or None.

    The breach is strict: a close exactly equal to the trigger level does
    not breach. The comparison is done in return space against
    ``terms.trigger_return_threshold`` so it agrees bit for bit with the
    payoff rules.
    """
    threshold = terms.trigger_return_threshold
    for (date, _), ret in zip(path.entries, cumulative_returns(path)):
        if ret < threshold:
            return date
    return None


def load_price_rows(lines: Iterable[str]) -> list[tuple[dt.date, float]]:
    """Read a ``date,close`` CSV into (date, close) rows.

    Rows must already be sorted by date, strictly ascending; anything else
    is rejected rather than silently re-sorted.
    """
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise PriceSeriesError("prices CSV is empty") from None
    if [h.strip().lower() for h in header] != ["date", "close"]:
        raise PriceSeriesError("prices CSV must start with header 'date,close'")

    rows: list[tuple[dt.date, float]] = []
    prev: dt.date | None = None
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise PriceSeriesError(f"line {lineno}: expected 'date,close'")
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise PriceSeriesError(f"line {lineno}: unparseable date {row[0]!r}") from None
        try:
            close = float(row[1])
        except ValueError:
            raise PriceSeriesError(f"line {lineno}: unparseable close {row[1]!r}") from None
        if not (math.isfinite(close) and close > 0):
            raise PriceSeriesError(f"line {lineno}: close must be positive")
        if prev is not None and date <= prev:
            raise PriceSeriesError(
                f"line {lineno}: rows must be presorted by date, strictly ascending"
            )
        rows.append((date, close))
        prev = date
    if not rows:
        raise PriceSeriesError("prices CSV contains no data rows")
    return rows


def load_index_path_csv(path, start_level: float) -> IndexPath:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = load_price_rows(handle)
    return IndexPath(entries=tuple(rows), start_level=start_level)
