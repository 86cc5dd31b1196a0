"""Term-sheet data model for autocallable reverse convertible notes.

A note is described by a small, line-oriented ``key = value`` document (the
"term sheet"): principal per note, the reference index starting level, the
trigger expressed as a fraction of the starting level, the contract dates,
and one ``observation = <date>, <coupon>`` line per quarterly observation.

Money is held as integer cents throughout the data model so that contract
amounts compare exactly; the analytic modules work in plain floats.
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, ROUND_HALF_UP
from typing import Iterable

__all__ = [
    "NoteTerms",
    "Observation",
    "TermSheetDiagnostic",
    "TermSheetError",
    "parse_term_sheet",
    "load_term_sheet",
    "serialize_term_sheet",
    "derive_coupon_schedule",
    "validate",
    "dollars_to_cents",
    "cents_to_str",
    "parse_kv_document",
]

_CENT = Decimal("0.01")


def dollars_to_cents(amount: float) -> int:
    """Round a dollar amount to integer cents, ties away from zero."""
    quantized = Decimal(repr(amount)).quantize(_CENT, rounding=ROUND_HALF_UP)
    return int(quantized.scaleb(2))


def cents_to_str(cents: int) -> str:
    """Format integer cents as a plain decimal dollar string ("-4.87")."""
    sign = "-" if cents < 0 else ""
    mag = abs(cents)
    return f"{sign}{mag // 100}.{mag % 100:02d}"


@dataclass(frozen=True)
class Observation:
    """One quarterly observation: the date and the coupon paid on a call."""

    date: dt.date
    coupon_cents: int


@dataclass(frozen=True)
class TermSheetDiagnostic:
    severity: str  # "error" or "warning"
    field_path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.field_path}: {self.message}"


class TermSheetError(ValueError):
    """Raised when a term-sheet document cannot produce valid NoteTerms."""

    def __init__(self, diagnostics: Iterable[TermSheetDiagnostic]):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"invalid term sheet: {lines}")


@dataclass(frozen=True)
class NoteTerms:
    """Contractual parameters of one autocallable note.

    ``trigger_level`` is always derived from ``trigger_fraction`` and the
    starting level; it is never stored on its own.
    """

    principal_cents: int
    index_starting_level: float
    trigger_fraction: float
    trade_date: dt.date
    final_valuation_date: dt.date
    maturity_date: dt.date
    observations: tuple[Observation, ...]
    settlement_date: dt.date | None = None
    per_annum_call_rate: float | None = None

    @property
    def principal(self) -> float:
        """Principal per note in dollars."""
        return self.principal_cents / 100.0

    @property
    def trigger_level(self) -> float:
        """Index level at which the trigger sits (fraction of the start)."""
        return self.trigger_fraction * self.index_starting_level

    @property
    def trigger_return_threshold(self) -> float:
        """Cumulative-return level equivalent to the trigger (e.g. -0.5)."""
        return self.trigger_fraction - 1.0

    @property
    def observation_dates(self) -> tuple[dt.date, ...]:
        return tuple(o.date for o in self.observations)

    @property
    def coupons_cents(self) -> tuple[int, ...]:
        return tuple(o.coupon_cents for o in self.observations)

    @property
    def coupons(self) -> tuple[float, ...]:
        """Coupon schedule in dollars."""
        return tuple(c / 100.0 for c in self.coupons_cents)


def derive_coupon_schedule(rate: float, principal_cents: int, quarters: int) -> list[int]:
    """Build the quarterly coupon schedule implied by a per-annum call rate.

    Coupon r accrues r quarters of simple interest:
    ``principal * rate * r / 4`` rounded to cents, ties away from zero.
    Returns integer cents.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    if quarters < 1:
        raise ValueError("quarters must be >= 1")
    principal = Decimal(principal_cents).scaleb(-2)
    rate_d = Decimal(repr(rate))
    schedule = []
    for r in range(1, quarters + 1):
        amount = (principal * rate_d * r / 4).quantize(_CENT, rounding=ROUND_HALF_UP)
        schedule.append(int(amount.scaleb(2)))
    return schedule


def validate(terms: NoteTerms) -> list[TermSheetDiagnostic]:
    """Check every NoteTerms invariant.

    Returns an empty list when the terms are fully consistent. A stored
    coupon schedule that disagrees with ``per_annum_call_rate`` is reported
    as a warning only: the stored coupons are authoritative.
    """
    diags: list[TermSheetDiagnostic] = []

    def error(path: str, message: str) -> None:
        diags.append(TermSheetDiagnostic("error", path, message))

    if terms.principal_cents <= 0:
        error("principal", "principal must be positive")
    if not (math.isfinite(terms.index_starting_level) and terms.index_starting_level > 0):
        error("index_starting_level", "starting level must be a positive finite number")
    if not (math.isfinite(terms.trigger_fraction) and 0.0 < terms.trigger_fraction < 1.0):
        error("trigger_fraction", "trigger fraction must lie strictly between 0 and 1")

    if not terms.observations:
        error("observations", "at least one observation is required")
    else:
        dates = terms.observation_dates
        if any(b <= a for a, b in zip(dates, dates[1:])):
            error("observations", "observation dates must be strictly increasing")
        if terms.trade_date >= dates[0]:
            error("trade_date", "trade date must precede the first observation date")
        if dates[-1] != terms.final_valuation_date:
            error(
                "final_valuation_date",
                "final valuation date must equal the last observation date",
            )
        coupons = terms.coupons_cents
        if any(c <= 0 for c in coupons):
            error("observations", "coupons must be positive")
        if any(b <= a for a, b in zip(coupons, coupons[1:])):
            error("observations", "coupons must be strictly increasing")

    if terms.final_valuation_date > terms.maturity_date:
        error("maturity_date", "maturity date must be on or after the final valuation date")

    if terms.per_annum_call_rate is not None and terms.observations:
        if not (math.isfinite(terms.per_annum_call_rate) and terms.per_annum_call_rate > 0):
            error("per_annum_call_rate", "call rate must be positive")
        else:
            derived = derive_coupon_schedule(
                terms.per_annum_call_rate, terms.principal_cents, len(terms.observations)
            )
            if tuple(derived) != terms.coupons_cents:
                diags.append(
                    TermSheetDiagnostic(
                        "warning",
                        "per_annum_call_rate",
                        "stored coupons {} differ from schedule {} implied by the call rate".format(
                            [cents_to_str(c) for c in terms.coupons_cents],
                            [cents_to_str(c) for c in derived],
                        ),
                    )
                )
    return diags


# --- document parsing -------------------------------------------------------

_REQUIRED_KEYS = (
    "principal",
    "index_starting_level",
    "trigger_fraction",
    "trade_date",
    "final_valuation_date",
    "maturity_date",
)
_OPTIONAL_KEYS = ("settlement_date", "per_annum_call_rate")


def parse_kv_document(text: str) -> list[tuple[int, str, str]]:
    """Split a line-oriented ``key = value`` document into (lineno, key, value).

    Blank lines and ``#`` comments (whole-line or trailing) are dropped.
    Lines without ``=`` raise ValueError carrying the line number.
    """
    entries: list[tuple[int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        entries.append((lineno, key.strip(), value.strip()))
    return entries


def _parse_date(value: str) -> dt.date:
    return dt.date.fromisoformat(value)


def _parse_cents(value: str) -> int:
    amount = Decimal(value)
    cents = amount.scaleb(2)
    if cents != cents.to_integral_value():
        raise ValueError("not a whole number of cents")
    return int(cents)


def parse_term_sheet(text: str) -> NoteTerms:
    """Parse a term-sheet document into NoteTerms.

    All problems found are collected into diagnostics; if any of them is an
    error the whole parse fails with :class:`TermSheetError`. Warnings (for
    example a coupon/call-rate mismatch) do not block parsing and can be
    recovered through :func:`validate`.
    """
    diags: list[TermSheetDiagnostic] = []

    def error(path: str, message: str) -> None:
        diags.append(TermSheetDiagnostic("error", path, message))

    try:
        entries = parse_kv_document(text)
    except ValueError as exc:
        raise TermSheetError([TermSheetDiagnostic("error", "document", str(exc))]) from exc

    scalars: dict[str, str] = {}
    observations: list[Observation] = []
    for lineno, key, value in entries:
        if key == "observation":
            idx = len(observations)
            parts = [p.strip() for p in value.split(",")]
            if len(parts) != 2 or not all(parts):
                error(
                    f"observations[{idx}]",
                    f"line {lineno}: expected 'observation = <date>, <coupon>'",
                )
                continue
            try:
                obs_date = _parse_date(parts[0])
            except ValueError:
                error(f"observations[{idx}].date", f"line {lineno}: unparseable date {parts[0]!r}")
                continue
            try:
                coupon = _parse_cents(parts[1])
            except (InvalidOperation, ValueError):
                error(
                    f"observations[{idx}].coupon",
                    f"line {lineno}: unparseable coupon {parts[1]!r}",
                )
                continue
            observations.append(Observation(obs_date, coupon))
        elif key in _REQUIRED_KEYS or key in _OPTIONAL_KEYS:
            if key in scalars:
                error(key, f"line {lineno}: duplicate key")
            else:
                scalars[key] = value
        else:
            diags.append(
                TermSheetDiagnostic("warning", key, f"line {lineno}: unknown key ignored")
            )

    for key in _REQUIRED_KEYS:
        if key not in scalars:
            error(key, "missing required key")
    if not observations and not any(d.field_path.startswith("observations") for d in diags):
        error("observations", "at least one observation line is required")

    def scalar(key: str, convert, label: str):
        if key not in scalars:
            return None
        try:
            return convert(scalars[key])
        except (ValueError, InvalidOperation):
            error(key, f"unparseable {label} {scalars[key]!r}")
            return None

    principal = scalar("principal", _parse_cents, "amount")
    start_level = scalar("index_starting_level", float, "number")
    trigger_fraction = scalar("trigger_fraction", float, "number")
    trade_date = scalar("trade_date", _parse_date, "date")
    final_valuation = scalar("final_valuation_date", _parse_date, "date")
    maturity = scalar("maturity_date", _parse_date, "date")
    settlement = scalar("settlement_date", _parse_date, "date")
    rate = scalar("per_annum_call_rate", float, "number")

    if any(d.severity == "error" for d in diags):
        raise TermSheetError([d for d in diags if d.severity == "error"])

    terms = NoteTerms(
        principal_cents=principal,
        index_starting_level=start_level,
        trigger_fraction=trigger_fraction,
        trade_date=trade_date,
        final_valuation_date=final_valuation,
        maturity_date=maturity,
        observations=tuple(observations),
        settlement_date=settlement,
        per_annum_call_rate=rate,
    )
    invariant_errors = [d for d in validate(terms) if d.severity == "error"]
    if invariant_errors:
        raise TermSheetError(invariant_errors)
    return terms


def load_term_sheet(path) -> NoteTerms:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_term_sheet(handle.read())


def serialize_term_sheet(terms: NoteTerms) -> str:
    """Render NoteTerms back into the canonical document form.

    ``parse_term_sheet(serialize_term_sheet(t)) == t`` for every valid ``t``.
    """
    lines = [
        f"principal = {cents_to_str(terms.principal_cents)}",
        f"index_starting_level = {terms.index_starting_level!r}",
        f"trigger_fraction = {terms.trigger_fraction!r}",
        f"trade_date = {terms.trade_date.isoformat()}",
    ]
    if terms.settlement_date is not None:
        lines.append(f"settlement_date = {terms.settlement_date.isoformat()}")
    lines.append(f"final_valuation_date = {terms.final_valuation_date.isoformat()}")
    lines.append(f"maturity_date = {terms.maturity_date.isoformat()}")
    if terms.per_annum_call_rate is not None:
        lines.append(f"per_annum_call_rate = {terms.per_annum_call_rate!r}")
    for obs in terms.observations:
        lines.append(f"observation = {obs.date.isoformat()}, {cents_to_str(obs.coupon_cents)}")
    return "\n".join(lines) + "\n"
