"""Closed-form expected net payment under simple market scenarios.

The scenario family treats the six observation returns as independent coin
flips with call probability ``p`` and summarizes the loss branch by two
numbers: ``b1``, the magnitude of the mean final return conditional on a
loss, and ``b2``, the probability of a trigger breach conditional on six
negative observations. A one-parameter upper bound replaces (b1, b2) with
``tau``, the probability that the final return itself sits below -50%.

Expected net payment, per note with coupons c_1..c_R and principal P:

    iid:    sum_r c_r (1-p)^(r-1) p  -  P * b1 * b2 * (1-p)^R
    bound:  sum_r c_r (1-p)^(r-1) p  -  (P/2) * (1-p)^(R-1) * tau

Both are exact at p = 0: -P*b1*b2 and -(P/2)*tau. These formulas assume
the trigger sits at half the starting level, as it does for the
reference note.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, TextIO

__all__ = [
    "ScenarioParams",
    "TauParams",
    "CaseDistribution",
    "Extrema",
    "SweepResult",
    "expected_net_payment_cases",
    "expected_net_payment_iid",
    "expected_net_payment_upper_bound",
    "iid_case_distribution",
    "find_extrema",
    "sweep",
    "write_sweep_csv",
]


@dataclass(frozen=True)
class ScenarioParams:
    """(p, b1, b2) scenario for the exact expected-payment formula."""

    p: float   # probability an observation return is nonnegative
    b1: float  # -E[final return | breach and six negative observations]
    b2: float  # P[breach | six negative observations]

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0.0 < self.b1 <= 1.0:
            raise ValueError("b1 must lie in (0, 1]")
        if not 0.0 < self.b2 <= 1.0:
            raise ValueError("b2 must lie in (0, 1]")


@dataclass(frozen=True)
class TauParams:
    """(p, tau) scenario for the one-parameter upper bound."""

    p: float
    tau: float  # P[final return < -1/2]

    def __post_init__(self):
        if self.p < 0.0 or self.tau < 0.0 or self.p + self.tau > 1.0:
            raise ValueError("require p >= 0, tau >= 0 and p + tau <= 1")


@dataclass(frozen=True)
class CaseDistribution:
    """Explicit probabilities for every settlement case.

    ``q_call[r-1]`` is the probability of a call at observation r,
    ``q_even`` the break-even probability, ``q_loss`` the trigger-loss
    probability, and ``mean_loss_return`` the conditional expectation of
    the final return given the loss case.
    """

    q_call: tuple[float, ...]
    q_even: float
    q_loss: float
    mean_loss_return: float

    def __post_init__(self):
        probs = (*self.q_call, self.q_even, self.q_loss)
        if any(not 0.0 <= q <= 1.0 for q in probs):
            raise ValueError("case probabilities must lie in [0, 1]")
        if not -1.0 <= self.mean_loss_return < 0.0:
            raise ValueError("mean_loss_return must lie in [-1, 0)")

    @property
    def total(self) -> float:
        return math.fsum((*self.q_call, self.q_even, self.q_loss))


def expected_net_payment_cases(
    dist: CaseDistribution, coupons: Sequence[float], principal: float
) -> float:
    """Expected net payment of an explicit case distribution.

    Total-expectation sum: coupons weighted by the per-observation call
    probabilities, zero on break-even, and principal times the mean loss
    return weighted by the loss probability.
    """
    if len(coupons) != len(dist.q_call):
        raise ValueError("coupon count must match the number of call cases")
    if abs(dist.total - 1.0) > 1e-12:
        raise ValueError(f"case probabilities sum to {dist.total!r}, not 1")
    terms = [c * q for c, q in zip(coupons, dist.q_call)]
    terms.append(principal * dist.mean_loss_return * dist.q_loss)
    return math.fsum(terms)


def _coupon_polynomial(p: float, coupons: Sequence[float]) -> float:
    # sum_r c_r (1-p)^(r-1) p, the called-branch part of the expectation
    miss = 1.0 - p
    acc = 0.0
    weight = p
    for c in coupons:
        acc += c * weight
        weight *= miss
    return acc


def expected_net_payment_iid(
    params: ScenarioParams, coupons: Sequence[float], principal: float
) -> float:
    """Exact expected net payment under the (p, b1, b2) scenario."""
    loss = principal * params.b1 * params.b2 * (1.0 - params.p) ** len(coupons)
    return _coupon_polynomial(params.p, coupons) - loss


def _bound_value(p: float, tau: float, coupons: Sequence[float], principal: float) -> float:
    # Raw bound polynomial. Sweeps and extrema searches evaluate this over
    # all p in [0, 1] at fixed tau, extrapolating past p + tau = 1 the same
    # way the published curves do; TauParams validation applies only where
    # the pair is used as an actual scenario.
    loss = 0.5 * principal * (1.0 - p) ** (len(coupons) - 1) * tau
    return _coupon_polynomial(p, coupons) - loss


def expected_net_payment_upper_bound(
    params: TauParams, coupons: Sequence[float], principal: float
) -> float:
    """One-parameter upper bound on the expected net payment.

    Replaces the (b1, b2) loss weight with tau: conditional on a final
    return below -1/2 the mean final return is itself below -1/2, so the
    loss branch is bounded by -(P/2) * (1-p)^(R-1) * tau.
    """
    return _bound_value(params.p, params.tau, coupons, principal)


def iid_case_distribution(params: ScenarioParams, quarters: int = 6) -> CaseDistribution:
    """Case distribution induced by the (p, b1, b2) scenario."""
    p, miss = params.p, 1.0 - params.p
    q_call = tuple(p * miss ** (r - 1) for r in range(1, quarters + 1))
    survive = miss ** quarters
    return CaseDistribution(
        q_call=q_call,
        q_even=survive * (1.0 - params.b2),
        q_loss=survive * params.b2,
        mean_loss_return=-params.b1,
    )


@dataclass(frozen=True)
class Extrema:
    p_max: float
    value_max: float
    p_min: float
    value_min: float


def _refine(f: Callable[[float], float], lo: float, hi: float, sign: float) -> float:
    # ternary search on the grid bracket; sign=+1 maximizes, -1 minimizes
    while hi - lo > 1e-6:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if sign * f(m1) < sign * f(m2):
            lo = m1
        else:
            hi = m2
    return 0.5 * (lo + hi)


def find_extrema(
    params: ScenarioParams | TauParams,
    coupons: Sequence[float],
    principal: float,
    resolution: int = 2001,
) -> Extrema:
    """Locate the extrema of the expected net payment over p in [0, 1].

    Dense grid scan followed by ternary refinement of the bracketing
    interval to |dp| <= 1e-6; endpoint candidates are always considered so
    boundary extrema (for example the exact minimum at p = 0) are returned
    exactly. Deterministic for fixed inputs.
    """
    if resolution < 1000:
        raise ValueError("resolution must be at least 1000")
    if isinstance(params, ScenarioParams):
        b1, b2 = params.b1, params.b2

        def f(p: float) -> float:
            return expected_net_payment_iid(ScenarioParams(p, b1, b2), coupons, principal)
    else:
        tau = params.tau

        def f(p: float) -> float:
            return _bound_value(p, tau, coupons, principal)

    step = 1.0 / (resolution - 1)
    grid = [i * step for i in range(resolution)]
    values = [f(p) for p in grid]

    def locate(sign: float) -> tuple[float, float]:
        best_i = max(range(resolution), key=lambda i: sign * values[i])
        lo = grid[max(best_i - 1, 0)]
        hi = grid[min(best_i + 1, resolution - 1)]
        refined = _refine(f, lo, hi, sign)
        candidates = [refined, grid[best_i], 0.0, 1.0]
        best = max(candidates, key=lambda p: (sign * f(p), -p))
        return best, f(best)

    p_max, value_max = locate(+1.0)
    p_min, value_min = locate(-1.0)
    return Extrema(p_max=p_max, value_max=value_max, p_min=p_min, value_min=value_min)


@dataclass(frozen=True)
class SweepResult:
    """Tabular sweep output plus, for surfaces, the swept-grid extrema."""

    mode: str
    header: tuple[str, ...]
    rows: list[tuple[float, ...]]
    extrema: dict[str, tuple[float, ...]] | None = None


def sweep(
    mode: str,
    points: int,
    coupons: Sequence[float],
    principal: float,
    b1: float | None = None,
    b2: float | None = None,
    tau: float | None = None,
) -> SweepResult:
    """Evaluate the expected-payment formulas over a parameter grid.

    ``iid`` sweeps p for fixed (b1, b2); ``bound`` sweeps p for fixed tau;
    ``surface`` sweeps (p, tau) jointly, skipping infeasible cells with
    p + tau > 1. Rows are ordered by p, then tau.
    """
    if points < 2:
        raise ValueError("points must be at least 2")
    step = 1.0 / (points - 1)
    ps = [i * step for i in range(points)]

    if mode == "iid":
        if b1 is None or b2 is None:
            raise ValueError("iid sweep requires b1 and b2")
        rows = [
            (p, expected_net_payment_iid(ScenarioParams(p, b1, b2), coupons, principal))
            for p in ps
        ]
        return SweepResult(mode, ("p", "expected_net_payment"), rows)

    if mode == "bound":
        if tau is None:
            raise ValueError("bound sweep requires tau")
        rows = [(p, _bound_value(p, tau, coupons, principal)) for p in ps]
        return SweepResult(mode, ("p", "expected_net_payment"), rows)

    if mode == "surface":
        rows = []
        best: tuple[float, ...] | None = None
        worst: tuple[float, ...] | None = None
        for p in ps:
            for t in ps:
                if p + t > 1.0 + 1e-12:
                    continue
                value = _bound_value(p, t, coupons, principal)
                rows.append((p, t, value))
                if best is None or value > best[2]:
                    best = (p, t, value)
                if worst is None or value < worst[2]:
                    worst = (p, t, value)
        return SweepResult(
            mode,
            ("p", "tau", "expected_net_payment"),
            rows,
            extrema={"global_max": best, "global_min": worst},
        )

    raise ValueError(f"unknown sweep mode {mode!r} (expected iid, bound or surface)")


def write_sweep_csv(result: SweepResult, out: TextIO) -> None:
    """Write sweep rows as CSV with six decimal places.

    Surface extrema go into trailing comment rows so the data block stays
    machine-readable.
    """
    out.write(",".join(result.header) + "\n")
    for row in result.rows:
        out.write(",".join(f"{v:.6f}" for v in row) + "\n")
    if result.extrema:
        for name in ("global_max", "global_min"):
            entry = result.extrema[name]
            out.write("# " + name + "," + ",".join(f"{v:.6f}" for v in entry) + "\n")
