"""Index paths, observation views, breach detection, prices CSV."""
import datetime as dt
import io

import numpy as np
import pytest

from autocall.path import (
    IndexPath,
    MissingObservationDateError,
    ObservationView,
    PriceSeriesError,
    breach_date,
    cumulative_returns,
    load_price_rows,
    observe,
)

START = 369.44
TABLE_CLOSES = (365.48, 302.05, 201.77, 121.51, 155.52, 189.37)
# direct arithmetic (close - start) / start, stated to 4 decimals
TABLE_RETURNS = (-0.0107, -0.1824, -0.4538, -0.6711, -0.5790, -0.4874)


def path_from_closes(closes, start=START, first=dt.date(2020, 1, 1)):
    entries = tuple(
        (first + dt.timedelta(days=i), float(c)) for i, c in enumerate(closes)
    )
    return IndexPath(entries=entries, start_level=start)


class TestCumulativeReturns:
    def test_final_observation_level(self):
        path = path_from_closes([189.37])
        assert cumulative_returns(path)[0] == pytest.approx(-0.48742, abs=1e-5)

    def test_identity(self):
        path = path_from_closes([369.44])
        assert cumulative_returns(path)[0] == 0.0

    def test_half_of_start_is_exactly_minus_half(self):
        path = path_from_closes([184.72])
        assert cumulative_returns(path)[0] == pytest.approx(-0.5, abs=1e-9)


class TestObserve:
    def test_reference_observation_returns(self, ref_terms, ref_view):
        for got, frozen, close in zip(
            ref_view.index_returns, TABLE_RETURNS, TABLE_CLOSES
        ):
            assert got == pytest.approx(frozen, abs=1e-4)
            assert got == pytest.approx((close - START) / START, abs=1e-12)
        assert ref_view.dates == ref_terms.observation_dates

    def test_running_minima_are_nonincreasing(self, ref_view):
        mins = ref_view.running_minima
        assert all(b <= a for a, b in zip(mins, mins[1:]))
        assert ref_view.d_min == min(mins)
        assert ref_view.d_min == pytest.approx((121.51 - START) / START, abs=1e-12)

    def test_missing_observation_date_is_named(self, ref_terms, ref_path):
        entries = tuple(e for e in ref_path.entries if e[0] != dt.date(2009, 2, 5))
        gappy = IndexPath(entries=entries, start_level=ref_path.start_level)
        with pytest.raises(MissingObservationDateError) as exc:
            observe(gappy, ref_terms)
        assert "2009-02-05" in str(exc.value)
        assert exc.value.date == dt.date(2009, 2, 5)

    def test_monotone_decreasing_path_has_min_at_observations(self, ref_terms, ref_path):
        dates = [d for d, _ in ref_path.entries]
        closes = np.linspace(360.0, 200.0, len(dates))
        path = IndexPath(
            entries=tuple((d, float(c)) for d, c in zip(dates, closes)),
            start_level=START,
        )
        view = observe(path, ref_terms)
        for ret, run in zip(view.index_returns, view.running_minima):
            assert run == ret

    def test_min_at_endpoint_means_final_return_is_overall_min(self, ref_terms, ref_view):
        assert min(ref_view.index_returns) >= ref_view.d_min
        assert ref_view.index_returns[-1] >= ref_view.d_min

    def test_min_on_final_date_makes_final_return_the_overall_min(self, ref_terms):
        # non-monotone path whose lowest close lands on the final valuation date
        dates = (ref_terms.trade_date, *ref_terms.observation_dates)
        closes = (369.44, 350.0, 360.0, 300.0, 320.0, 310.0, 240.0)
        path = IndexPath(entries=tuple(zip(dates, closes)), start_level=START)
        scenario = observe(path, ref_terms)
        assert scenario.d_min == scenario.index_returns[-1]

    def test_final_observation_equals_final_entry_return(self, ref_terms, ref_path, ref_view):
        # the path ends on the final valuation date, so the last observation
        # return is exactly the last entry's cumulative return
        assert ref_path.entries[-1][0] == ref_terms.final_valuation_date
        assert ref_view.index_returns[-1] == cumulative_returns(ref_path)[-1]

    def test_observe_preserves_order_and_count(self, ref_terms, ref_path, ref_view):
        assert len(ref_view.index_returns) == len(ref_terms.observations)
        assert ref_view.dates == ref_terms.observation_dates


class TestBreachDate:
    def test_reference_breach_in_fourth_quarter(self, ref_terms, ref_path):
        first = breach_date(ref_path, ref_terms)
        # oracle: scan closes directly against the trigger level
        expected = next(
            d for d, c in ref_path.entries if c < ref_terms.trigger_level
        )
        assert first == expected == dt.date(2008, 11, 26)
        assert dt.date(2008, 11, 5) < first <= dt.date(2009, 2, 5)

    def test_observation_closes_only_breach_at_fourth(self, ref_terms):
        # a path holding just the observation-date closes first dips below
        # the trigger on the fourth observation date
        entries = tuple(zip(ref_terms.observation_dates, TABLE_CLOSES))
        path = IndexPath(entries=entries, start_level=START)
        assert breach_date(path, ref_terms) == dt.date(2009, 2, 5)

    def test_no_breach_when_all_above(self, ref_terms):
        path = path_from_closes([300.0, 250.0, 200.0])
        assert breach_date(path, ref_terms) is None

    def test_close_exactly_at_trigger_is_not_a_breach(self, ref_terms):
        path = path_from_closes([200.0, 184.72, 200.0])
        assert breach_date(path, ref_terms) is None

    def test_breach_iff_d_min_below_threshold(self, ref_terms):
        rng = np.random.default_rng(7)
        for _ in range(200):
            closes = START * np.exp(
                np.cumsum(rng.normal(-0.02, 0.08, size=rng.integers(3, 40)))
            )
            path = path_from_closes(closes)
            d_min = min(cumulative_returns(path))
            assert (breach_date(path, ref_terms) is None) == (d_min >= -0.5)


class TestIndexPathInvariants:
    def test_rejects_unsorted_dates(self):
        with pytest.raises(ValueError):
            IndexPath(
                entries=((dt.date(2020, 1, 2), 10.0), (dt.date(2020, 1, 1), 11.0)),
                start_level=10.0,
            )

    def test_rejects_nonpositive_close(self):
        with pytest.raises(ValueError):
            IndexPath(entries=((dt.date(2020, 1, 1), 0.0),), start_level=10.0)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            IndexPath(entries=(), start_level=10.0)


class TestObservationViewInvariants:
    def test_running_min_cannot_exceed_return(self):
        with pytest.raises(ValueError):
            ObservationView(index_returns=(-0.2,), running_minima=(-0.1,))

    def test_running_minima_must_be_nonincreasing(self):
        with pytest.raises(ValueError):
            ObservationView(
                index_returns=(-0.3, -0.1), running_minima=(-0.3, -0.2)
            )

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ObservationView(index_returns=(-0.3, -0.1), running_minima=(-0.3,))


class TestPricesCsv:
    def test_round_trip(self, data_dir, ref_path):
        with open(data_dir / "sp500_financials_replay.csv") as handle:
            rows = load_price_rows(handle)
        assert tuple(rows) == ref_path.entries

    def test_rejects_unsorted(self):
        text = "date,close\n2020-01-02,10\n2020-01-01,11\n"
        with pytest.raises(PriceSeriesError, match="presorted"):
            load_price_rows(io.StringIO(text))

    def test_rejects_bad_header(self):
        with pytest.raises(PriceSeriesError, match="header"):
            load_price_rows(io.StringIO("day,price\n2020-01-01,10\n"))

    def test_rejects_bad_values(self):
        with pytest.raises(PriceSeriesError, match="date"):
            load_price_rows(io.StringIO("date,close\nJan 1,10\n"))
        with pytest.raises(PriceSeriesError, match="close"):
            load_price_rows(io.StringIO("date,close\n2020-01-01,ten\n"))
        with pytest.raises(PriceSeriesError, match="positive"):
            load_price_rows(io.StringIO("date,close\n2020-01-01,-4\n"))

    def test_rejects_empty(self):
        with pytest.raises(PriceSeriesError):
            load_price_rows(io.StringIO(""))
        with pytest.raises(PriceSeriesError):
            load_price_rows(io.StringIO("date,close\n"))
