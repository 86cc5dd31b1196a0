"""Settlement rules for the note under both readings of the payment procedure.

The pricing supplement's call/trigger rules admit two readings, and the two
can settle the same path very differently:

* Interpretation A ("call anytime"): the note is called at the first
  observation whose index return is nonnegative, no matter what happened to
  the trigger earlier. Only if the note is never called does the trigger
  decide between returning the principal and paying ``principal * (1 + I_R)``.

* Interpretation B ("a breach blocks calling"): once any daily close has
  breached the trigger, the note can no longer be called; the holder simply
  waits and receives ``principal * (1 + I_R)`` at the end. A breach during
  the same quarter as a nonnegative observation does not block that call,
  only breaches in earlier quarters do.

On paths that never breach the trigger the two readings agree exactly.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

from .path import ObservationView
from .terms import NoteTerms, dollars_to_cents

__all__ = [
    "PayoffOutcome",
    "payoff_interpretation_A",
    "payoff_interpretation_B",
    "resolve",
    "settlement_amount",
    "CALLED",
    "BREAK_EVEN",
    "TRIGGER_LOSS",
    "POST_BREACH_HOLD",
]

CALLED = "called"
BREAK_EVEN = "break_even"
TRIGGER_LOSS = "trigger_loss"
POST_BREACH_HOLD = "post_breach_hold"


@dataclass(frozen=True)
class PayoffOutcome:
    """Settlement of one note on one path.

    ``net_exact`` is the unrounded net payment in dollars; ``net_cents`` is
    the same amount rounded to cents (ties away from zero) at this final
    step only, and ``gross_cents`` is exactly principal plus net.
    """

    net_cents: int
    gross_cents: int
    net_exact: float
    resolution: str
    call_index: int | None  # 1-based observation number when called
    resolution_date: dt.date | None
    payment_date: dt.date | None
    interpretation: str

    @property
    def gross_exact(self) -> float:
        return self.gross_cents / 100.0


def _outcome(terms: NoteTerms, interpretation: str, resolution: str,
             net_exact: float, call_index: int | None) -> PayoffOutcome:
    if resolution == CALLED:
        net_cents = terms.coupons_cents[call_index - 1]
        resolution_date = terms.observations[call_index - 1].date
    else:
        net_cents = dollars_to_cents(net_exact)
        resolution_date = terms.final_valuation_date
    return PayoffOutcome(
        net_cents=net_cents,
        gross_cents=terms.principal_cents + net_cents,
        net_exact=net_exact,
        resolution=resolution,
        call_index=call_index,
        resolution_date=resolution_date,
        # Called notes also pay out on the final valuation date.
        payment_date=terms.final_valuation_date,
        interpretation=interpretation,
    )


def _check_view(terms: NoteTerms, view: ObservationView) -> None:
    if len(view.index_returns) != len(terms.observations):
        raise ValueError(
            f"view has {len(view.index_returns)} observations, "
            f"terms define {len(terms.observations)}"
        )


def payoff_interpretation_A(terms: NoteTerms, view: ObservationView) -> PayoffOutcome:
    """Settle under interpretation A (call anytime).

    Cases, checked in order:
      1. some observation return is nonnegative: called at the first such
         observation, net = that observation's coupon;
      2. all returns negative, trigger never breached: break even;
      3. all returns negative, trigger breached: net = principal * I_R.
    """
    _check_view(terms, view)
    threshold = terms.trigger_return_threshold
    for r, ret in enumerate(view.index_returns, start=1):
        if ret >= 0.0:
            return _outcome(terms, "A", CALLED, terms.coupons_cents[r - 1] / 100.0, r)
    if view.d_min >= threshold:
        return _outcome(terms, "A", BREAK_EVEN, 0.0, None)
    final_return = view.index_returns[-1]
    return _outcome(terms, "A", TRIGGER_LOSS, terms.principal * final_return, None)


def payoff_interpretation_B(terms: NoteTerms, view: ObservationView) -> PayoffOutcome:
    """Settle under interpretation B (a breach blocks calling).

    The observations are scanned in order. At observation r:
      * if no breach happened through observation r-1 and the return is
        nonnegative, the note is called (a breach during quarter r itself
        does not block the call);
      * otherwise, if a breach happened at or before r, scanning stops and
        the holder receives principal * I_R at the end;
      * otherwise scanning continues.
    Surviving every observation with negative returns and no breach breaks
    even.
    """
    _check_view(terms, view)
    threshold = terms.trigger_return_threshold
    final_return = view.index_returns[-1]
    previous_min = None  # None == before the first quarter, vacuously unbreached
    for r, (ret, run_min) in enumerate(
        zip(view.index_returns, view.running_minima), start=1
    ):
        unbreached_before = previous_min is None or previous_min >= threshold
        if unbreached_before and ret >= 0.0:
            return _outcome(terms, "B", CALLED, terms.coupons_cents[r - 1] / 100.0, r)
        if run_min < threshold:
            return _outcome(terms, "B", POST_BREACH_HOLD, terms.principal * final_return, None)
        previous_min = run_min
    return _outcome(terms, "B", BREAK_EVEN, 0.0, None)


def resolve(terms: NoteTerms, view: ObservationView, interpretation: str) -> PayoffOutcome:
    if interpretation == "A":
        return payoff_interpretation_A(terms, view)
    if interpretation == "B":
        return payoff_interpretation_B(terms, view)
    raise ValueError(f"unknown interpretation {interpretation!r} (expected 'A' or 'B')")


def settlement_amount(outcome: PayoffOutcome) -> int:
    """Gross settlement per note, in cents (principal plus rounded net)."""
    return outcome.gross_cents
