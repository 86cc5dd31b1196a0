"""Settlement rules under both readings of the payment procedure."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autocall.path import ObservationView
from autocall.payoff import (
    BREAK_EVEN,
    CALLED,
    POST_BREACH_HOLD,
    TRIGGER_LOSS,
    payoff_interpretation_A,
    payoff_interpretation_B,
    resolve,
    settlement_amount,
)


def view(returns, minima=None):
    returns = tuple(float(r) for r in returns)
    if minima is None:
        acc, mins = math.inf, []
        for r in returns:
            acc = min(acc, r)
            mins.append(acc)
        minima = tuple(mins)
    return ObservationView(index_returns=returns, running_minima=tuple(minima))


class TestInterpretationA:
    def test_reference_outcome_is_trigger_loss(self, ref_terms, ref_view):
        outcome = payoff_interpretation_A(ref_terms, ref_view)
        assert outcome.resolution == TRIGGER_LOSS
        assert outcome.net_cents == -487
        assert outcome.gross_cents == 513
        assert settlement_amount(outcome) == 513
        assert outcome.net_exact == pytest.approx(10 * ref_view.index_returns[-1], abs=1e-12)
        assert outcome.resolution_date == ref_terms.final_valuation_date

    def test_immediate_call(self, ref_terms):
        outcome = payoff_interpretation_A(
            ref_terms, view([0.001, -0.1, -0.2, -0.3, -0.4, -0.45])
        )
        assert outcome.resolution == CALLED
        assert outcome.call_index == 1
        assert outcome.net_cents == 52
        assert outcome.resolution_date == ref_terms.observations[0].date
        assert outcome.payment_date == ref_terms.final_valuation_date

    def test_break_even_when_trigger_survives(self, ref_terms):
        outcome = payoff_interpretation_A(
            ref_terms, view([-0.1, -0.2, -0.3, -0.4, -0.45, -0.49])
        )
        assert outcome.resolution == BREAK_EVEN
        assert outcome.net_cents == 0
        assert outcome.gross_cents == 1000

    def test_call_at_final_observation_pays_last_coupon(self, ref_terms):
        outcome = payoff_interpretation_A(
            ref_terms, view([-0.1, -0.2, -0.3, -0.4, -0.45, 0.0])
        )
        assert outcome.resolution == CALLED
        assert outcome.call_index == 6
        assert outcome.net_cents == 313
        assert outcome.gross_cents == 1313

    def test_exact_boundary_minus_half_breaks_even(self, ref_terms):
        outcome = payoff_interpretation_A(
            ref_terms,
            view([-0.1, -0.2, -0.3, -0.4, -0.45, -0.49],
                 minima=[-0.1, -0.5, -0.5, -0.5, -0.5, -0.5]),
        )
        assert outcome.resolution == BREAK_EVEN


class TestInterpretationB:
    def test_reference_outcome_matches_interpretation_a(self, ref_terms, ref_view):
        outcome = payoff_interpretation_B(ref_terms, ref_view)
        assert outcome.resolution == POST_BREACH_HOLD
        assert outcome.gross_cents == 513

    def test_breach_blocks_later_call(self, ref_terms):
        # first-quarter breach, second-quarter recovery: A calls, B holds
        scenario = view(
            [-0.2, 0.05, -0.1, -0.2, -0.25, -0.30],
            minima=[-0.6, -0.6, -0.6, -0.6, -0.6, -0.6],
        )
        held = payoff_interpretation_B(ref_terms, scenario)
        assert held.resolution == POST_BREACH_HOLD
        assert held.net_cents == -300
        assert held.gross_cents == 700
        called = payoff_interpretation_A(ref_terms, scenario)
        assert called.resolution == CALLED
        assert called.call_index == 2
        assert called.net_cents == 104

    def test_breach_free_paths_coincide(self, ref_terms):
        scenario = view([-0.1, -0.2, 0.03, -0.1, -0.2, -0.3])
        a = payoff_interpretation_A(ref_terms, scenario)
        b = payoff_interpretation_B(ref_terms, scenario)
        assert a.resolution == b.resolution == CALLED
        assert a.call_index == b.call_index == 3
        assert a.net_cents == b.net_cents == 156

    def test_same_quarter_breach_does_not_block_the_call(self, ref_terms):
        # dip below the trigger during quarter 2 while the quarter-2 close
        # still sits at or above the start: the call stands
        scenario = view(
            [-0.2, 0.01, -0.1, -0.2, -0.25, -0.30],
            minima=[-0.2, -0.6, -0.6, -0.6, -0.6, -0.6],
        )
        outcome = payoff_interpretation_B(ref_terms, scenario)
        assert outcome.resolution == CALLED
        assert outcome.call_index == 2

    def test_breach_then_strong_recovery_pays_upside(self, ref_terms):
        scenario = view(
            [-0.6, -0.2, -0.1, -0.05, -0.02, 0.05],
            minima=[-0.6, -0.6, -0.6, -0.6, -0.6, -0.6],
        )
        outcome = payoff_interpretation_B(ref_terms, scenario)
        assert outcome.resolution == POST_BREACH_HOLD
        assert outcome.net_cents == 50
        assert outcome.gross_cents == 1050

    def test_exact_boundary_does_not_block(self, ref_terms):
        scenario = view(
            [-0.1, 0.2, -0.1, -0.2, -0.25, -0.30],
            minima=[-0.5, -0.5, -0.5, -0.5, -0.5, -0.5],
        )
        outcome = payoff_interpretation_B(ref_terms, scenario)
        assert outcome.resolution == CALLED
        assert outcome.call_index == 2


class TestResolveDispatch:
    def test_unknown_interpretation(self, ref_terms, ref_view):
        with pytest.raises(ValueError):
            resolve(ref_terms, ref_view, "C")

    def test_view_length_mismatch(self, ref_terms):
        with pytest.raises(ValueError):
            payoff_interpretation_A(ref_terms, view([-0.1, -0.2]))


def random_views(n, seed):
    """Random six-observation scenarios, including trigger dips and ties."""
    rng = np.random.default_rng(seed)
    returns = rng.uniform(-0.9, 0.5, size=(n, 6))
    # sprinkle exact ties at 0 and at the trigger
    ties = rng.random(size=(n, 6))
    returns[ties < 0.02] = 0.0
    returns[ties > 0.99] = -0.5
    dips = rng.exponential(0.12, size=(n, 6)) * (rng.random(size=(n, 6)) < 0.4)
    lows = np.minimum.accumulate(np.minimum(returns, returns - dips), axis=1)
    for ret_row, low_row in zip(returns, lows):
        yield ObservationView(
            index_returns=tuple(ret_row.tolist()),
            running_minima=tuple(low_row.tolist()),
        )


def test_bulk_properties_on_random_scenarios(ref_terms):
    threshold = ref_terms.trigger_return_threshold
    n = 10_000
    for scenario in random_views(n, seed=20260809):
        a = payoff_interpretation_A(ref_terms, scenario)
        b = payoff_interpretation_B(ref_terms, scenario)

        # exhaustiveness: exactly one resolution, from each reading's menu
        assert a.resolution in (CALLED, BREAK_EVEN, TRIGGER_LOSS)
        assert b.resolution in (CALLED, BREAK_EVEN, POST_BREACH_HOLD)

        # bounds: A nets within [-principal, max coupon]; gross never negative
        assert -1000 <= a.net_cents <= 313
        assert -10.0 <= a.net_exact <= 3.13
        assert a.gross_cents >= 0
        assert b.gross_cents >= 0

        breached = scenario.d_min < threshold
        if not breached:
            assert (a.resolution, a.call_index, a.net_cents) == (
                b.resolution,
                b.call_index,
                b.net_cents,
            )
        if scenario.index_returns[-1] < 0.0:
            assert b.net_exact <= a.net_exact
            assert b.net_cents <= a.net_cents
        if b.resolution == CALLED:
            # a call under B implies the same call under A
            assert a.resolution == CALLED
            assert a.call_index == b.call_index


@st.composite
def scenario_views(draw):
    n = 6
    returns = draw(
        st.lists(
            st.floats(min_value=-0.95, max_value=0.6, allow_nan=False),
            min_size=n,
            max_size=n,
        )
    )
    dips = draw(
        st.lists(st.floats(min_value=0.0, max_value=0.4), min_size=n, max_size=n)
    )
    acc, mins = math.inf, []
    for r, dip in zip(returns, dips):
        acc = min(acc, r - dip)
        mins.append(acc)
    return ObservationView(index_returns=tuple(returns), running_minima=tuple(mins))


@given(scenario=scenario_views())
@settings(max_examples=300, deadline=None)
def test_property_single_resolution_and_dominance(ref_terms, scenario):
    a = payoff_interpretation_A(ref_terms, scenario)
    b = payoff_interpretation_B(ref_terms, scenario)
    assert a.gross_cents == ref_terms.principal_cents + a.net_cents
    assert b.gross_cents == ref_terms.principal_cents + b.net_cents
    if scenario.index_returns[-1] < 0.0:
        assert b.net_exact <= a.net_exact
