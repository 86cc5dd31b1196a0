"""Bundled sample note and a synthetic price history that replays it.

The sample is an S&P 500 Financials-linked autocallable sold in early 2008:
$10 principal, starting level 369.44, trigger at 50% of the start, six
quarterly observations from May 2008 to August 2009 with coupons implied by
a 20.84% per-annum call rate.

The price history here is synthetic: the closes on the trade date and the
six observation dates are the actual published levels, and the days in
between are linearly interpolated over a weekday calendar. That keeps the
replay outcome identical to the actual one (the interpolation never dips
below the trigger before the actual sub-trigger quarter) without shipping
proprietary index data.
"""
from __future__ import annotations

import datetime as dt

from .path import IndexPath
from .terms import NoteTerms, Observation

__all__ = [
    "reference_terms",
    "reference_observation_closes",
    "synthetic_reference_path",
    "reference_term_sheet_text",
    "reference_prices_csv_text",
]

_START_LEVEL = 369.44
_TRADE_DATE = dt.date(2008, 2, 5)

_OBSERVATIONS = (
    (dt.date(2008, 5, 5), 52),
    (dt.date(2008, 8, 5), 104),
    (dt.date(2008, 11, 5), 156),
    (dt.date(2009, 2, 5), 208),
    (dt.date(2009, 5, 5), 261),
    (dt.date(2009, 8, 5), 313),
)

_OBSERVATION_CLOSES = (365.48, 302.05, 201.77, 121.51, 155.52, 189.37)


def reference_terms() -> NoteTerms:
    """Terms of the bundled sample note."""
    return NoteTerms(
        principal_cents=1000,
        index_starting_level=_START_LEVEL,
        trigger_fraction=0.5,
        trade_date=_TRADE_DATE,
        settlement_date=dt.date(2008, 2, 8),
        final_valuation_date=dt.date(2009, 8, 5),
        maturity_date=dt.date(2009, 8, 10),
        observations=tuple(Observation(d, c) for d, c in _OBSERVATIONS),
        per_annum_call_rate=0.2084,
    )


def reference_observation_closes() -> tuple[tuple[dt.date, float], ...]:
    """The actual closes on the six observation dates."""
    return tuple((d, c) for (d, _), c in zip(_OBSERVATIONS, _OBSERVATION_CLOSES))


def _weekdays(first: dt.date, last: dt.date) -> list[dt.date]:
    days = []
    day = first
    while day <= last:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def synthetic_reference_path() -> IndexPath:
    """Weekday path through the anchor closes, linear between anchors."""
    anchors = [(_TRADE_DATE, _START_LEVEL), *reference_observation_closes()]
    days = _weekdays(_TRADE_DATE, anchors[-1][0])
    entries: list[tuple[dt.date, float]] = []
    for (d0, c0), (d1, c1) in zip(anchors, anchors[1:]):
        segment = [day for day in days if d0 <= day <= d1]
        span = len(segment) - 1
        for i, day in enumerate(segment):
            if day == d1 and d1 != anchors[-1][0]:
                continue  # the next segment starts here
            close = c0 + (c1 - c0) * i / span
            entries.append((day, round(close, 2)))
    return IndexPath(entries=tuple(entries), start_level=_START_LEVEL)


def reference_term_sheet_text() -> str:
    from .terms import serialize_term_sheet

    return serialize_term_sheet(reference_terms())


def reference_prices_csv_text() -> str:
    lines = ["date,close"]
    for day, close in synthetic_reference_path().entries:
        lines.append(f"{day.isoformat()},{close:.2f}")
    return "\n".join(lines) + "\n"
