"""Term-sheet parsing, validation, and coupon-schedule derivation."""
import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dataclasses import replace

from autocall.terms import (
    NoteTerms,
    Observation,
    TermSheetError,
    cents_to_str,
    derive_coupon_schedule,
    dollars_to_cents,
    parse_term_sheet,
    serialize_term_sheet,
    validate,
)


def _errors(diags):
    return [d for d in diags if d.severity == "error"]


def _warnings(diags):
    return [d for d in diags if d.severity == "warning"]


class TestCouponSchedule:
    def test_reference_schedule(self):
        schedule = derive_coupon_schedule(0.2084, 1000, 6)
        assert schedule == [52, 104, 156, 208, 261, 313]
        assert [c / 100 for c in schedule] == [0.52, 1.04, 1.56, 2.08, 2.61, 3.13]

    def test_single_quarter_prefix(self):
        assert derive_coupon_schedule(0.2084, 1000, 1) == [52]

    def test_exact_arithmetic_no_rounding(self):
        assert derive_coupon_schedule(0.40, 1000, 2) == [100, 200]

    def test_ties_round_away_from_zero(self):
        # 10 * 0.2084 * 5/4 = 2.605 must land on 2.61, not 2.60
        assert derive_coupon_schedule(0.2084, 1000, 6)[4] == 261

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            derive_coupon_schedule(0.0, 1000, 6)
        with pytest.raises(ValueError):
            derive_coupon_schedule(0.2, 1000, 0)

    @given(
        rate=st.floats(min_value=0.02, max_value=2.0),
        principal=st.integers(min_value=200, max_value=10_000_000),
        quarters=st.integers(min_value=1, max_value=12),
    )
    @settings(max_examples=200, deadline=None)
    def test_strictly_increasing(self, rate, principal, quarters):
        # keep quarterly increments at a cent or more; sub-cent increments
        # can tie after rounding
        if principal * rate / 4 < 1.0:
            return
        schedule = derive_coupon_schedule(rate, principal, quarters)
        assert all(b > a for a, b in zip(schedule, schedule[1:]))
        assert all(c > 0 for c in schedule)


class TestMoneyHelpers:
    @pytest.mark.parametrize(
        "amount,cents",
        [(2.605, 261), (-2.605, -261), (1.5625, 156), (0.52, 52), (-4.8741338, -487), (0.0, 0)],
    )
    def test_dollars_to_cents(self, amount, cents):
        assert dollars_to_cents(amount) == cents

    def test_cents_to_str(self):
        assert cents_to_str(513) == "5.13"
        assert cents_to_str(-487) == "-4.87"
        assert cents_to_str(1000) == "10.00"
        assert cents_to_str(5) == "0.05"


class TestParse:
    def test_reference_sheet(self, data_dir, ref_terms):
        text = (data_dir / "reference_term_sheet.txt").read_text()
        terms = parse_term_sheet(text)
        assert terms == ref_terms
        assert terms.principal_cents == 1000
        assert terms.index_starting_level == 369.44
        assert terms.trigger_level == pytest.approx(184.72, abs=1e-12)
        assert terms.coupons_cents == (52, 104, 156, 208, 261, 313)
        assert validate(terms) == []

    def test_observations_out_of_order(self, ref_terms):
        text = serialize_term_sheet(ref_terms)
        lines = text.splitlines()
        obs = [l for l in lines if l.startswith("observation")]
        other = [l for l in lines if not l.startswith("observation")]
        shuffled = "\n".join(other + obs[::-1])
        with pytest.raises(TermSheetError) as exc:
            parse_term_sheet(shuffled)
        assert any(d.field_path.startswith("observations") for d in exc.value.diagnostics)

    def test_missing_principal(self, ref_terms):
        text = "\n".join(
            l for l in serialize_term_sheet(ref_terms).splitlines()
            if not l.startswith("principal")
        )
        with pytest.raises(TermSheetError) as exc:
            parse_term_sheet(text)
        assert any(d.field_path == "principal" for d in exc.value.diagnostics)

    def test_unparseable_date_and_number(self, ref_terms):
        text = serialize_term_sheet(ref_terms)
        bad = text.replace("trade_date = 2008-02-05", "trade_date = Feb 5, 2008")
        bad = bad.replace("index_starting_level = 369.44", "index_starting_level = many")
        with pytest.raises(TermSheetError) as exc:
            parse_term_sheet(bad)
        paths = {d.field_path for d in exc.value.diagnostics}
        assert "trade_date" in paths
        assert "index_starting_level" in paths

    def test_observation_line_missing_coupon(self, ref_terms):
        text = serialize_term_sheet(ref_terms).replace(
            "observation = 2008-11-05, 1.56", "observation = 2008-11-05"
        )
        with pytest.raises(TermSheetError) as exc:
            parse_term_sheet(text)
        assert any("observations[" in d.field_path for d in exc.value.diagnostics)

    def test_duplicate_key_rejected(self, ref_terms):
        text = serialize_term_sheet(ref_terms) + "principal = 20.00\n"
        with pytest.raises(TermSheetError) as exc:
            parse_term_sheet(text)
        assert any(d.field_path == "principal" for d in exc.value.diagnostics)

    def test_unknown_key_is_tolerated(self, ref_terms):
        text = serialize_term_sheet(ref_terms) + "issuer = Example Bank\n"
        assert parse_term_sheet(text) == ref_terms

    def test_comments_and_blank_lines(self, ref_terms):
        text = "# header comment\n\n" + serialize_term_sheet(ref_terms).replace(
            "trigger_fraction = 0.5", "trigger_fraction = 0.5  # half the start"
        )
        assert parse_term_sheet(text) == ref_terms

    def test_sub_cent_amount_rejected(self, ref_terms):
        text = serialize_term_sheet(ref_terms).replace(
            "principal = 10.00", "principal = 10.005"
        )
        with pytest.raises(TermSheetError):
            parse_term_sheet(text)


class TestValidate:
    def test_trigger_fraction_out_of_range(self, ref_terms):
        broken = replace(ref_terms, trigger_fraction=1.2)
        diags = validate(broken)
        assert any(d.field_path == "trigger_fraction" for d in _errors(diags))

    def test_rate_coupon_mismatch_is_warning(self, ref_terms):
        mismatched = replace(ref_terms, per_annum_call_rate=0.30)
        diags = validate(mismatched)
        assert not _errors(diags)
        warning = _warnings(diags)
        assert len(warning) == 1
        assert warning[0].field_path == "per_annum_call_rate"
        # the warning compares against the schedule the stored rate implies
        implied = derive_coupon_schedule(0.30, 1000, 6)
        assert implied != list(ref_terms.coupons_cents)

    def test_nonincreasing_coupons(self, ref_terms):
        obs = list(ref_terms.observations)
        obs[3] = Observation(obs[3].date, obs[2].coupon_cents)
        broken = replace(ref_terms, observations=tuple(obs))
        assert any(d.field_path == "observations" for d in _errors(validate(broken)))

    def test_final_valuation_must_match_last_observation(self, ref_terms):
        broken = replace(ref_terms, final_valuation_date=dt.date(2009, 8, 6))
        assert any(
            d.field_path == "final_valuation_date" for d in _errors(validate(broken))
        )

    def test_maturity_before_final_valuation(self, ref_terms):
        broken = replace(ref_terms, maturity_date=dt.date(2009, 8, 1))
        assert any(d.field_path == "maturity_date" for d in _errors(validate(broken)))

    def test_trade_date_must_precede_observations(self, ref_terms):
        broken = replace(ref_terms, trade_date=dt.date(2008, 5, 5))
        assert any(d.field_path == "trade_date" for d in _errors(validate(broken)))


@st.composite
def note_terms(draw):
    n_obs = draw(st.integers(min_value=1, max_value=8))
    trade = draw(st.dates(min_value=dt.date(1990, 1, 1), max_value=dt.date(2030, 1, 1)))
    gaps = draw(st.lists(st.integers(1, 200), min_size=n_obs, max_size=n_obs))
    dates = []
    day = trade
    for gap in gaps:
        day = day + dt.timedelta(days=gap)
        dates.append(day)
    coupon_steps = draw(st.lists(st.integers(1, 10_000), min_size=n_obs, max_size=n_obs))
    coupons = []
    total = 0
    for step in coupon_steps:
        total += step
        coupons.append(total)
    maturity = dates[-1] + dt.timedelta(days=draw(st.integers(0, 30)))
    settlement = draw(
        st.none() | st.just(trade + dt.timedelta(days=draw(st.integers(0, 10))))
    )
    return NoteTerms(
        principal_cents=draw(st.integers(1, 10_000_000)),
        index_starting_level=draw(
            st.floats(min_value=1e-3, max_value=1e7, allow_nan=False, allow_infinity=False)
        ),
        trigger_fraction=draw(
            st.floats(min_value=1e-6, max_value=1.0, exclude_max=True)
        ),
        trade_date=trade,
        final_valuation_date=dates[-1],
        maturity_date=maturity,
        observations=tuple(Observation(d, c) for d, c in zip(dates, coupons)),
        settlement_date=settlement,
        per_annum_call_rate=draw(
            st.none() | st.floats(min_value=1e-4, max_value=5.0)
        ),
    )


@given(terms=note_terms())
@settings(max_examples=200, deadline=None)
def test_serialize_parse_round_trip(terms):
    assert not _errors(validate(terms))
    assert parse_term_sheet(serialize_term_sheet(terms)) == terms
