"""Payoff analysis toolkit for autocallable reverse convertible notes.

The toolkit models one note family: quarterly observations, fixed call
coupons, and a down-side trigger at a fraction of the starting index level.
It settles historical paths under the two defensible readings of the call
rule, evaluates closed-form expected net payments under simple scenario
families, and cross-checks everything with Monte Carlo simulation and exact
lattice enumeration.
"""
from .analytic import (
    CaseDistribution,
    Extrema,
    ScenarioParams,
    SweepResult,
    TauParams,
    expected_net_payment_cases,
    expected_net_payment_iid,
    expected_net_payment_upper_bound,
    find_extrema,
    iid_case_distribution,
    sweep,
    write_sweep_csv,
)
from .montecarlo import (
    BootstrapModel,
    DailyLatticeModel,
    Estimate,
    GeometricWalkModel,
    IidSignModel,
    MarkovSignModel,
    enumerate_exact,
    estimate_expected_payment,
    estimate_model_params,
    iid_sign_exact,
    load_model_spec,
    simulate_paths,
    verify_inequalities,
)
from .path import (
    IndexPath,
    MissingObservationDateError,
    ObservationView,
    breach_date,
    cumulative_returns,
    load_index_path_csv,
    observe,
)
from .payoff import (
    PayoffOutcome,
    payoff_interpretation_A,
    payoff_interpretation_B,
    resolve,
    settlement_amount,
)
from .reference import reference_terms, synthetic_reference_path
from .terms import (
    NoteTerms,
    Observation,
    TermSheetDiagnostic,
    TermSheetError,
    derive_coupon_schedule,
    load_term_sheet,
    parse_term_sheet,
    serialize_term_sheet,
    validate,
)

__version__ = "0.1.0"
