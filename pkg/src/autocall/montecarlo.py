"""Generative market models and simulation/enumeration engines.

Five model families produce the scenarios the payoff rules consume:

* ``iid_sign``: the six observation returns get independent signs (call
  probability ``p`` each); conditional on six negative observations the
  trigger is breached with probability ``b2``, and the final return in a
  breach scenario is drawn from a small discrete law with mean ``-b1``.
  This generates scenarios at the observation level, so the independence
  assumption behind the closed-form expectation holds exactly.
* ``markov_sign``: like ``iid_sign`` but the observation signs follow a
  two-state chain with momentum: after a negative quarter the next quarter
  is negative with probability ``m`` (>= 1/2 unless explicitly overridden).
* ``daily_lattice``: each trading day multiplies the index by ``u`` with
  probability ``q`` or ``d`` otherwise; small instances can be enumerated
  exhaustively, which makes this family the exact oracle.
* ``geometric_walk``: IID normal daily log-returns.
* ``bootstrap``: daily simple returns resampled from an ingested price
  history.

Reproducibility: paths are generated in fixed-size blocks, and block ``b``
of master seed ``s`` always uses the substream seeded by
``SeedSequence(s, spawn_key=(b,))``. Results therefore depend only on
(seed, n, block_size), never on how blocks might be distributed across
workers. Per-block partial sums are combined with exact summation.

The sign-level models pin the trigger at half the starting level, which is
also how the scenario parameters (b1, b2, tau) are defined.
"""
from __future__ import annotations

import datetime as dt
import itertools
import math
import pathlib
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from . import payoff as payoff_rules
from .analytic import _bound_value
from .path import IndexPath, ObservationView, load_price_rows
from .terms import NoteTerms, parse_kv_document

__all__ = [
    "IidSignModel",
    "MarkovSignModel",
    "DailyLatticeModel",
    "GeometricWalkModel",
    "BootstrapModel",
    "MarketModel",
    "Estimate",
    "ExactEnumeration",
    "ParamEstimates",
    "InequalityCheck",
    "InequalityReport",
    "EnumerationError",
    "EstimationError",
    "ModelSpecError",
    "simulate_paths",
    "estimate_expected_payment",
    "enumerate_exact",
    "iid_sign_exact",
    "estimate_model_params",
    "verify_inequalities",
    "load_model_spec",
    "observation_day_indices",
    "DEFAULT_BLOCK_SIZE",
    "MAX_ENUMERABLE_STEPS",
]

DEFAULT_BLOCK_SIZE = 4096
MAX_ENUMERABLE_STEPS = 22

# Synthetic intra-quarter dip applied to breached sign-level scenarios; any
# level below the -1/2 trigger works, the payoff only compares against it.
_BREACH_DIP = -0.75

# Nominal calendar for simulated daily paths (model time is day count).
_SIM_BASE_DATE = dt.date(2000, 1, 3)
_SIM_START_LEVEL = 100.0


class EnumerationError(ValueError):
    """The lattice instance is too large to enumerate exhaustively."""


class EstimationError(ValueError):
    """A conditional estimator's conditioning event was hit too rarely."""


class ModelSpecError(ValueError):
    """A model-spec document is malformed."""


def observation_day_indices(n_days: int, quarters: int) -> tuple[int, ...]:
    """0-based day indices of the quarter-boundary observations.

    Quarter r observes day round(n_days * r / quarters); the last
    observation always falls on the final day.
    """
    idx = tuple(int(round(n_days * r / quarters)) - 1 for r in range(1, quarters + 1))
    if len(set(idx)) != quarters or any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] < 0:
        raise ValueError(f"cannot place {quarters} observations on {n_days} days")
    return idx


def _loss_atoms(b1: float, points: int) -> np.ndarray:
    # Discrete uniform law for the final return of a breach scenario:
    # symmetric around -b1, so the mean is -b1 exactly, supported in (-1, 0).
    half_width = min(b1, 1.0 - b1) / 2.0
    return -b1 + half_width * np.linspace(-1.0, 1.0, points)


def _views_from_signs(
    rng: np.random.Generator, pos: np.ndarray, b2: float, atoms: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Fill observation-level scenarios for a matrix of signs.

    Nonnegative quarters draw magnitudes in [0, 0.25); negative ones in
    [-0.5, 0), so the trigger is never touched by the draws themselves.
    Conditional on all quarters negative, a breach happens with probability
    ``b2``; breached scenarios replace the final return with a loss atom and
    get a first-quarter dip below the trigger. Scenarios with a nonnegative
    quarter never breach, so on this family a breach can never block a call.
    """
    n, quarters = pos.shape
    mag_pos = rng.uniform(0.0, 0.25, size=(n, quarters))
    mag_neg = rng.uniform(-0.5, 0.0, size=(n, quarters))
    breach_draw = rng.random(n)
    atom_idx = rng.integers(0, len(atoms), size=n)

    returns = np.where(pos, mag_pos, mag_neg)
    all_negative = ~pos.any(axis=1)
    breach = all_negative & (breach_draw < b2)
    returns[breach, quarters - 1] = atoms[atom_idx[breach]]
    running_min = np.minimum.accumulate(returns, axis=1)
    running_min[breach] = np.minimum(running_min[breach], _BREACH_DIP)
    return returns, running_min


@dataclass(frozen=True)
class IidSignModel:
    """Observation-level scenario generator with IID call signs."""

    p: float
    b1: float
    b2: float
    quarters: int = 6
    loss_points: int = 5

    kind = "iid_sign"
    daily = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0.0 < self.b1 < 1.0:
            raise ValueError("b1 must lie strictly between 0 and 1")
        if not 0.0 <= self.b2 <= 1.0:
            raise ValueError("b2 must lie in [0, 1]")
        if self.quarters < 1 or self.loss_points < 1:
            raise ValueError("quarters and loss_points must be positive")

    def loss_atoms(self) -> np.ndarray:
        return _loss_atoms(self.b1, self.loss_points)

    def sample_block(self, rng: np.random.Generator, n: int):
        pos = rng.random((n, self.quarters)) < self.p
        return _views_from_signs(rng, pos, self.b2, self.loss_atoms())


@dataclass(frozen=True)
class MarkovSignModel:
    """Sign-level model with quarter-to-quarter momentum.

    ``p`` is both the probability the first quarter is nonnegative and the
    continuation probability after a nonnegative quarter; ``m`` is the
    probability a negative quarter is followed by another negative quarter.
    Momentum means m >= 1/2; euphoric-market instances with m < 1/2 must be
    requested explicitly via ``allow_low_momentum``.
    """

    p: float
    m: float
    b1: float
    b2: float
    quarters: int = 6
    loss_points: int = 5
    allow_low_momentum: bool = False

    kind = "markov_sign"
    daily = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0.0 <= self.m <= 1.0:
            raise ValueError("m must lie in [0, 1]")
        if self.m < 0.5 and not self.allow_low_momentum:
            raise ValueError("momentum m < 1/2 requires allow_low_momentum")
        if not 0.0 < self.b1 < 1.0:
            raise ValueError("b1 must lie strictly between 0 and 1")
        if not 0.0 <= self.b2 <= 1.0:
            raise ValueError("b2 must lie in [0, 1]")
        if self.quarters < 1 or self.loss_points < 1:
            raise ValueError("quarters and loss_points must be positive")

    def loss_atoms(self) -> np.ndarray:
        return _loss_atoms(self.b1, self.loss_points)

    def sample_block(self, rng: np.random.Generator, n: int):
        draws = rng.random((n, self.quarters))
        pos = np.empty((n, self.quarters), dtype=bool)
        pos[:, 0] = draws[:, 0] < self.p
        for r in range(1, self.quarters):
            pos[:, r] = np.where(
                pos[:, r - 1], draws[:, r] < self.p, draws[:, r] < 1.0 - self.m
            )
        return _views_from_signs(rng, pos, self.b2, self.loss_atoms())


class _DailyModel:
    """Shared observation logic for models that generate daily paths."""

    daily = True

    @property
    def n_days(self) -> int:
        raise NotImplementedError

    def observation_indices(self) -> tuple[int, ...]:
        return observation_day_indices(self.n_days, self.quarters)

    def sample_block(self, rng: np.random.Generator, n: int):
        relative = self.sample_relative_closes(rng, n)
        returns = relative - 1.0
        obs = list(self.observation_indices())
        running_min = np.minimum.accumulate(returns, axis=1)
        return returns[:, obs], running_min[:, obs]


@dataclass(frozen=True)
class DailyLatticeModel(_DailyModel):
    """Two-point daily multiplicative lattice; small instances enumerate."""

    u: float
    d: float
    q: float
    days_per_quarter: int
    quarters: int = 6

    kind = "daily_lattice"

    def __post_init__(self):
        if not (self.u > 1.0 > self.d > 0.0):
            raise ValueError("require u > 1 > d > 0")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        if self.days_per_quarter < 1 or self.quarters < 1:
            raise ValueError("days_per_quarter and quarters must be positive")

    @property
    def n_days(self) -> int:
        return self.days_per_quarter * self.quarters

    def sample_relative_closes(self, rng: np.random.Generator, n: int) -> np.ndarray:
        up = rng.random((n, self.n_days)) < self.q
        factors = np.where(up, self.u, self.d)
        return np.cumprod(factors, axis=1)


@dataclass(frozen=True)
class GeometricWalkModel(_DailyModel):
    """IID normal daily log-returns over the full observation period."""

    mu: float
    sigma: float
    n_trading_days: int = 381
    quarters: int = 6

    kind = "geometric_walk"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError("mu and sigma must be finite")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        if self.n_trading_days < self.quarters or self.quarters < 1:
            raise ValueError("need at least one trading day per quarter")

    @property
    def n_days(self) -> int:
        return self.n_trading_days

    def sample_relative_closes(self, rng: np.random.Generator, n: int) -> np.ndarray:
        increments = rng.normal(self.mu, self.sigma, size=(n, self.n_days))
        return np.exp(np.cumsum(increments, axis=1))


@dataclass(frozen=True)
class BootstrapModel(_DailyModel):
    """Daily simple returns resampled (IID, with replacement) from history."""

    daily_returns: tuple[float, ...]
    n_trading_days: int = 381
    quarters: int = 6

    kind = "bootstrap"

    def __post_init__(self):
        if not self.daily_returns:
            raise ValueError("bootstrap history is empty")
        if any(r <= -1.0 or not math.isfinite(r) for r in self.daily_returns):
            raise ValueError("daily returns must be finite and greater than -1")
        if self.n_trading_days < self.quarters or self.quarters < 1:
            raise ValueError("need at least one trading day per quarter")

    @classmethod
    def from_price_rows(cls, rows, n_trading_days: int = 381, quarters: int = 6):
        closes = [close for _, close in rows]
        if len(closes) < 2:
            raise ValueError("bootstrap history needs at least two closes")
        returns = tuple(b / a - 1.0 for a, b in zip(closes, closes[1:]))
        return cls(daily_returns=returns, n_trading_days=n_trading_days, quarters=quarters)

    @property
    def n_days(self) -> int:
        return self.n_trading_days

    def sample_relative_closes(self, rng: np.random.Generator, n: int) -> np.ndarray:
        history = np.asarray(self.daily_returns)
        picks = rng.integers(0, len(history), size=(n, self.n_days))
        return np.cumprod(1.0 + history[picks], axis=1)


MarketModel = Union[
    IidSignModel, MarkovSignModel, DailyLatticeModel, GeometricWalkModel, BootstrapModel
]


# --- sampling ---------------------------------------------------------------


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block_index,)))


def _blocks(n: int, seed: int, block_size: int) -> Iterator[tuple[int, np.random.Generator]]:
    if block_size < 1:
        raise ValueError("block_size must be positive")
    for block_index, start in enumerate(range(0, n, block_size)):
        count = min(block_size, n - start)
        yield count, _block_rng(seed, block_index)


def _check_model_terms(model: MarketModel, terms: NoteTerms) -> None:
    if model.quarters != len(terms.observations):
        raise ValueError(
            f"model generates {model.quarters} observations, "
            f"terms define {len(terms.observations)}"
        )


def simulate_paths(
    model: MarketModel, n: int, seed: int, block_size: int = DEFAULT_BLOCK_SIZE
):
    """Yield ``n`` simulated scenarios, deterministically.

    Sign-level models yield :class:`ObservationView`; daily models yield
    :class:`IndexPath` on a synthetic consecutive-day calendar with a
    nominal starting level of 100. The stream depends only on
    (model, n, seed, block_size).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if model.daily:
        dates = tuple(_SIM_BASE_DATE + dt.timedelta(days=i) for i in range(model.n_days))
    for count, rng in _blocks(n, seed, block_size):
        if model.daily:
            relative = model.sample_relative_closes(rng, count)
            closes = _SIM_START_LEVEL * relative
            for row in closes:
                yield IndexPath(
                    entries=tuple(zip(dates, row.tolist())),
                    start_level=_SIM_START_LEVEL,
                )
        else:
            returns, running_min = model.sample_block(rng, count)
            for ret_row, min_row in zip(returns, running_min):
                yield ObservationView(
                    index_returns=tuple(ret_row.tolist()),
                    running_minima=tuple(min_row.tolist()),
                )


# --- vectorized settlement ---------------------------------------------------


def _resolve_codes_a(returns: np.ndarray, running_min: np.ndarray, threshold: float) -> np.ndarray:
    # codes: r=1..R call at observation r, 0 break even, -1 loss branch
    nonneg = returns >= 0.0
    any_call = nonneg.any(axis=1)
    first = np.argmax(nonneg, axis=1)
    codes = np.where(any_call, first + 1, 0).astype(np.int64)
    codes[~any_call & (running_min[:, -1] < threshold)] = -1
    return codes


def _resolve_codes_b(returns: np.ndarray, running_min: np.ndarray, threshold: float) -> np.ndarray:
    n = returns.shape[0]
    previous_min = np.concatenate(
        [np.full((n, 1), np.inf), running_min[:, :-1]], axis=1
    )
    call_ok = (returns >= 0.0) & (previous_min >= threshold)
    # Scanning stops at the first call or the first breach; a call wins a tie
    # within the same quarter.
    stop = call_ok | (running_min < threshold)
    any_stop = stop.any(axis=1)
    first = np.argmax(stop, axis=1)
    called = any_stop & call_ok[np.arange(n), first]
    codes = np.zeros(n, dtype=np.int64)
    codes[called] = first[called] + 1
    codes[any_stop & ~called] = -1
    return codes


def _nets_from_codes(
    codes: np.ndarray, returns: np.ndarray, coupons: tuple[float, ...], principal: float
) -> np.ndarray:
    nets = np.zeros(codes.shape[0])
    for r, coupon in enumerate(coupons, start=1):
        nets[codes == r] = coupon
    loss = codes == -1
    nets[loss] = principal * returns[loss, -1]
    return nets


def _batch_nets(
    returns: np.ndarray, running_min: np.ndarray, terms: NoteTerms, interpretation: str
) -> np.ndarray:
    threshold = terms.trigger_return_threshold
    if interpretation == "A":
        codes = _resolve_codes_a(returns, running_min, threshold)
    elif interpretation == "B":
        codes = _resolve_codes_b(returns, running_min, threshold)
    else:
        raise ValueError(f"unknown interpretation {interpretation!r}")
    return _nets_from_codes(codes, returns, terms.coupons, terms.principal)


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate with its sampling error.

    ``ci95`` is exactly mean +/- 1.96 standard errors. Identical
    (model, n, seed, block_size) inputs reproduce the estimate bit for bit.
    """

    mean: float
    std_error: float
    ci95: tuple[float, float]
    n_paths: int
    seed: int
    block_size: int = DEFAULT_BLOCK_SIZE


def estimate_expected_payment(
    model: MarketModel,
    terms: NoteTerms,
    interpretation: str,
    n: int,
    seed: int,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> Estimate:
    """Sample-mean estimate of the expected net payment (dollars per note)."""
    if n < 100:
        raise ValueError("n must be at least 100")
    _check_model_terms(model, terms)
    block_sums: list[float] = []
    block_sumsqs: list[float] = []
    for count, rng in _blocks(n, seed, block_size):
        returns, running_min = model.sample_block(rng, count)
        nets = _batch_nets(returns, running_min, terms, interpretation)
        block_sums.append(float(np.sum(nets)))
        block_sumsqs.append(float(np.sum(nets * nets)))
    total = math.fsum(block_sums)
    total_sq = math.fsum(block_sumsqs)
    mean = total / n
    variance = max((total_sq - n * mean * mean) / (n - 1), 0.0)
    std_error = math.sqrt(variance / n)
    return Estimate(
        mean=mean,
        std_error=std_error,
        ci95=(mean - 1.96 * std_error, mean + 1.96 * std_error),
        n_paths=n,
        seed=seed,
        block_size=block_size,
    )


# --- exact enumeration --------------------------------------------------------

_ENUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class ExactEnumeration:
    """Exact path-space statistics of an enumerable lattice instance.

    Probabilities and expectations are exact sums over every path of the
    lattice. ``b1``/``b2`` are None when their conditioning events are
    empty. ``max_net_b_minus_net_a`` is the pathwise worst case of the
    B-minus-A net difference, used to decide whether the expectation
    comparison between the interpretations is a theorem on this instance.
    """

    n_paths: int
    expected_net_a: float
    expected_net_b: float
    call_probs_a: tuple[float, ...]
    even_prob_a: float
    loss_prob_a: float
    call_probs_b: tuple[float, ...]
    even_prob_b: float
    loss_prob_b: float
    p: float
    tau: float
    b1: float | None
    b2: float | None
    all_negative_prob: float
    breach_all_negative_prob: float
    # P(observation-r return below the trigger | all observations negative)
    obs_breach_given_all_negative: tuple[float, ...]
    mean_final_given_breach_all_negative: float | None
    mean_final_given_obs_breach: tuple[float | None, ...]
    max_net_b_minus_net_a: float

    def expected_net(self, interpretation: str) -> float:
        if interpretation == "A":
            return self.expected_net_a
        if interpretation == "B":
            return self.expected_net_b
        raise ValueError(f"unknown interpretation {interpretation!r}")


def enumerate_exact(model: DailyLatticeModel, terms: NoteTerms) -> ExactEnumeration:
    """Enumerate every lattice path and settle it under both interpretations.

    The instance must have at most ``MAX_ENUMERABLE_STEPS`` daily steps
    (about 4M paths). Per-path probabilities are q^(#up) (1-q)^(#down).
    """
    if not isinstance(model, DailyLatticeModel):
        raise TypeError("exact enumeration requires a daily_lattice model")
    _check_model_terms(model, terms)
    n_steps = model.n_days
    if n_steps > MAX_ENUMERABLE_STEPS:
        raise EnumerationError(
            f"instance too large: {n_steps} steps > {MAX_ENUMERABLE_STEPS}"
        )
    n_paths = 1 << n_steps
    obs = list(model.observation_indices())
    threshold = terms.trigger_return_threshold
    coupons = terms.coupons
    principal = terms.principal
    quarters = model.quarters
    bit_positions = np.arange(n_steps, dtype=np.uint64)

    # per-chunk partial sums, combined exactly at the end
    parts: dict[str, list[float]] = {
        key: []
        for key in (
            "prob", "net_a", "net_b", "p", "tau", "all_neg", "breach_all_neg",
            "final_breach_all_neg", "even_a", "loss_a", "even_b", "loss_b",
        )
    }
    call_a = [[] for _ in range(quarters)]
    call_b = [[] for _ in range(quarters)]
    obs_breach = [[] for _ in range(quarters)]
    final_obs_breach = [[] for _ in range(quarters)]
    max_diff = -math.inf

    for start in range(0, n_paths, _ENUM_CHUNK):
        count = min(_ENUM_CHUNK, n_paths - start)
        ids = np.arange(start, start + count, dtype=np.uint64)
        up = ((ids[:, None] >> bit_positions[None, :]) & 1).astype(bool)
        factors = np.where(up, model.u, model.d)
        returns_daily = np.cumprod(factors, axis=1) - 1.0
        running_daily = np.minimum.accumulate(returns_daily, axis=1)
        returns = returns_daily[:, obs]
        running_min = running_daily[:, obs]

        ups = up.sum(axis=1)
        prob = model.q ** ups * (1.0 - model.q) ** (n_steps - ups)

        codes_a = _resolve_codes_a(returns, running_min, threshold)
        codes_b = _resolve_codes_b(returns, running_min, threshold)
        nets_a = _nets_from_codes(codes_a, returns, coupons, principal)
        nets_b = _nets_from_codes(codes_b, returns, coupons, principal)

        final = returns[:, -1]
        all_neg = (returns < 0.0).all(axis=1)
        breach_all_neg = all_neg & (running_min[:, -1] < threshold)

        parts["prob"].append(float(prob.sum()))
        parts["net_a"].append(float((prob * nets_a).sum()))
        parts["net_b"].append(float((prob * nets_b).sum()))
        parts["p"].append(float(prob[returns[:, 0] >= 0.0].sum()))
        parts["tau"].append(float(prob[final < threshold].sum()))
        parts["all_neg"].append(float(prob[all_neg].sum()))
        parts["breach_all_neg"].append(float(prob[breach_all_neg].sum()))
        parts["final_breach_all_neg"].append(float((prob * final)[breach_all_neg].sum()))
        parts["even_a"].append(float(prob[codes_a == 0].sum()))
        parts["loss_a"].append(float(prob[codes_a == -1].sum()))
        parts["even_b"].append(float(prob[codes_b == 0].sum()))
        parts["loss_b"].append(float(prob[codes_b == -1].sum()))
        for r in range(quarters):
            call_a[r].append(float(prob[codes_a == r + 1].sum()))
            call_b[r].append(float(prob[codes_b == r + 1].sum()))
            event = all_neg & (returns[:, r] < threshold)
            obs_breach[r].append(float(prob[event].sum()))
            final_obs_breach[r].append(float((prob * final)[event].sum()))
        max_diff = max(max_diff, float((nets_b - nets_a).max()))

    total = {key: math.fsum(values) for key, values in parts.items()}
    p_all_neg = total["all_neg"]
    p_breach = total["breach_all_neg"]
    b2 = p_breach / p_all_neg if p_all_neg > 0.0 else None
    b1 = -total["final_breach_all_neg"] / p_breach if p_breach > 0.0 else None
    obs_breach_probs = tuple(math.fsum(v) for v in obs_breach)
    mean_final_obs = tuple(
        (math.fsum(final_obs_breach[r]) / obs_breach_probs[r])
        if obs_breach_probs[r] > 0.0 else None
        for r in range(quarters)
    )
    return ExactEnumeration(
        n_paths=n_paths,
        expected_net_a=total["net_a"],
        expected_net_b=total["net_b"],
        call_probs_a=tuple(math.fsum(v) for v in call_a),
        even_prob_a=total["even_a"],
        loss_prob_a=total["loss_a"],
        call_probs_b=tuple(math.fsum(v) for v in call_b),
        even_prob_b=total["even_b"],
        loss_prob_b=total["loss_b"],
        p=total["p"],
        tau=total["tau"],
        b1=b1,
        b2=b2,
        all_negative_prob=p_all_neg,
        breach_all_negative_prob=p_breach,
        obs_breach_given_all_negative=tuple(
            q / p_all_neg if p_all_neg > 0.0 else 0.0 for q in obs_breach_probs
        ),
        mean_final_given_breach_all_negative=(
            -b1 if b1 is not None else None
        ),
        mean_final_given_obs_breach=mean_final_obs,
        max_net_b_minus_net_a=max_diff,
    )


def iid_sign_exact(model: IidSignModel, terms: NoteTerms, interpretation: str = "A") -> float:
    """Exact expected net payment of a sign-level model, via the case rules.

    The payoff depends on a scenario only through the sign pattern, the
    breach indicator and the final-return loss atom, so the scenario space
    is finite: every sign pattern, crossed with breach/no-breach and the
    loss atoms on the all-negative branch. Each scenario is settled by the
    actual settlement rules, not by the closed-form formula, which makes
    this an independent check of that formula.
    """
    _check_model_terms(model, terms)
    quarters = model.quarters
    atoms = [float(a) for a in model.loss_atoms()]

    def representative_view(signs, final_return=None, breach=False) -> ObservationView:
        returns = [0.1 if s else -0.25 for s in signs]
        if final_return is not None:
            returns[-1] = final_return
        running, acc = [], math.inf
        for value in returns:
            acc = min(acc, value)
            running.append(min(acc, _BREACH_DIP) if breach else acc)
        return ObservationView(tuple(returns), tuple(running))

    contributions: list[float] = []
    for signs in itertools.product((False, True), repeat=quarters):
        prob = 1.0
        for s in signs:
            prob *= model.p if s else 1.0 - model.p
        if prob == 0.0:
            continue
        if any(signs):
            outcome = payoff_rules.resolve(terms, representative_view(signs), interpretation)
            contributions.append(prob * outcome.net_exact)
        else:
            survive = payoff_rules.resolve(terms, representative_view(signs), interpretation)
            contributions.append(prob * (1.0 - model.b2) * survive.net_exact)
            if model.b2 > 0.0:
                atom_weight = prob * model.b2 / len(atoms)
                for atom in atoms:
                    hit = payoff_rules.resolve(
                        terms, representative_view(signs, atom, breach=True), interpretation
                    )
                    contributions.append(atom_weight * hit.net_exact)
    return math.fsum(contributions)


# --- parameter estimation -----------------------------------------------------


@dataclass(frozen=True)
class ParamEstimates:
    """Conditional sample estimates of the scenario parameters.

    p: share of scenarios whose first observation return is nonnegative.
    b1: minus the mean final return over breached all-negative scenarios.
    b2: share of all-negative scenarios that breached.
    tau: share of scenarios whose final return fell below -1/2.
    Standard errors are binomial (p, b2, tau) or sample-based (b1).
    """

    p: float
    p_se: float
    b1: float
    b1_se: float
    b2: float
    b2_se: float
    tau: float
    tau_se: float
    n_paths: int
    n_all_negative: int
    n_breach: int
    seed: int


def estimate_model_params(
    model: MarketModel, n: int, seed: int, block_size: int = DEFAULT_BLOCK_SIZE
) -> ParamEstimates:
    """Estimate (p, b1, b2, tau) from simulated scenarios.

    The all-negative conditioning event must occur at least 30 times and at
    least two breach scenarios are needed, otherwise the conditional
    estimators are meaningless and :class:`EstimationError` is raised.
    """
    if n < 1:
        raise ValueError("n must be positive")
    threshold = -0.5  # the scenario parameters are defined against -1/2
    n_pos_first = 0
    n_all_neg = 0
    n_breach = 0
    n_tau = 0
    final_sum: list[float] = []
    final_sumsq: list[float] = []
    for count, rng in _blocks(n, seed, block_size):
        returns, running_min = model.sample_block(rng, count)
        final = returns[:, -1]
        all_neg = (returns < 0.0).all(axis=1)
        breach = all_neg & (running_min[:, -1] < threshold)
        n_pos_first += int((returns[:, 0] >= 0.0).sum())
        n_all_neg += int(all_neg.sum())
        n_breach += int(breach.sum())
        n_tau += int((final < threshold).sum())
        final_sum.append(float(final[breach].sum()))
        final_sumsq.append(float((final[breach] ** 2).sum()))

    if n_all_neg < 30:
        raise EstimationError(
            f"all-negative scenarios occurred {n_all_neg} times; need at least 30"
        )
    if n_breach < 2:
        raise EstimationError(
            f"breach scenarios occurred {n_breach} times; cannot estimate b1"
        )

    def binomial(successes: int, trials: int) -> tuple[float, float]:
        rate = successes / trials
        return rate, math.sqrt(rate * (1.0 - rate) / trials)

    p_hat, p_se = binomial(n_pos_first, n)
    tau_hat, tau_se = binomial(n_tau, n)
    b2_hat, b2_se = binomial(n_breach, n_all_neg)
    mean_final = math.fsum(final_sum) / n_breach
    var_final = max(
        (math.fsum(final_sumsq) - n_breach * mean_final * mean_final) / (n_breach - 1), 0.0
    )
    return ParamEstimates(
        p=p_hat,
        p_se=p_se,
        b1=-mean_final,
        b1_se=math.sqrt(var_final / n_breach),
        b2=b2_hat,
        b2_se=b2_se,
        tau=tau_hat,
        tau_se=tau_se,
        n_paths=n,
        n_all_negative=n_all_neg,
        n_breach=n_breach,
        seed=seed,
    )


# --- inequality verification ---------------------------------------------------


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    lhs: float | None
    relation: str
    rhs: float | None
    holds: bool | None  # None when the conditioning event is empty
    note: str = ""

    def render(self) -> str:
        if self.holds is None:
            return f"{self.name}: not applicable ({self.note})"
        status = "OK" if self.holds else "VIOLATED"
        suffix = f"  [{self.note}]" if self.note else ""
        return f"{self.name}: {self.lhs:.9f} {self.relation} {self.rhs:.9f}  {status}{suffix}"


@dataclass(frozen=True)
class InequalityReport:
    checks: tuple[InequalityCheck, ...]
    enumeration: ExactEnumeration

    @property
    def applicable_all_hold(self) -> bool:
        return all(c.holds for c in self.checks if c.holds is not None)

    def to_text(self) -> str:
        return "\n".join(c.render() for c in self.checks)


def verify_inequalities(model: DailyLatticeModel, terms: NoteTerms) -> InequalityReport:
    """Check the structural inequalities of the payoff exactly, by enumeration.

    For each observation r (conditioning on six negative observations):
      * the overall breach probability dominates the per-observation one;
      * the mean final return conditional on an overall breach is at most
        the mean conditional on observation r itself breaching;
      * the call probability under interpretation B never exceeds A's.
    The expectation comparison between the interpretations is asserted only
    when no path pays more under B than under A (breach-then-recovery paths
    can break the pathwise ordering); otherwise it is reported without a
    verdict. Finally the closed-form upper bound, evaluated at this
    instance's exact (p, tau), must dominate the exact expectation under A.
    """
    exact = enumerate_exact(model, terms)
    quarters = model.quarters
    checks: list[InequalityCheck] = []

    for r in range(quarters):
        if exact.b2 is None:
            checks.append(
                InequalityCheck(
                    f"breach_prob_dominates[{r + 1}]", None, ">=", None, None,
                    "no all-negative paths",
                )
            )
        else:
            rhs = exact.obs_breach_given_all_negative[r]
            checks.append(
                InequalityCheck(
                    f"breach_prob_dominates[{r + 1}]", exact.b2, ">=", rhs,
                    exact.b2 >= rhs,
                )
            )

    for r in range(quarters):
        lhs = exact.mean_final_given_breach_all_negative
        rhs = exact.mean_final_given_obs_breach[r]
        if lhs is None or rhs is None:
            checks.append(
                InequalityCheck(
                    f"conditional_mean_ordering[{r + 1}]", None, "<=", None, None,
                    "conditioning event empty",
                )
            )
        else:
            checks.append(
                InequalityCheck(
                    f"conditional_mean_ordering[{r + 1}]", lhs, "<=", rhs, lhs <= rhs
                )
            )

    for r in range(quarters):
        qa, qb = exact.call_probs_a[r], exact.call_probs_b[r]
        checks.append(
            InequalityCheck(f"call_prob_dominance[{r + 1}]", qb, "<=", qa, qb <= qa)
        )

    pathwise_ordered = exact.max_net_b_minus_net_a <= 0.0
    checks.append(
        InequalityCheck(
            "expectation_comparison",
            exact.expected_net_b,
            "<=",
            exact.expected_net_a,
            exact.expected_net_b <= exact.expected_net_a if pathwise_ordered else None,
            "pathwise ordered" if pathwise_ordered
            else "breach-then-recovery paths present; reported without verdict",
        )
    )

    bound = _bound_value(exact.p, exact.tau, terms.coupons, terms.principal)
    checks.append(
        InequalityCheck(
            "upper_bound_dominates",
            exact.expected_net_a,
            "<=",
            bound,
            exact.expected_net_a <= bound,
            "bound at exact (p, tau)",
        )
    )
    return InequalityReport(checks=tuple(checks), enumeration=exact)


# --- model spec files -----------------------------------------------------------


def load_model_spec(path) -> MarketModel:
    """Load a market model from a ``key = value`` spec document.

    The ``model`` key selects the family; the remaining keys are its
    parameters. A bootstrap spec names its price history CSV in ``history``,
    resolved relative to the spec file's directory.
    """
    spec_path = pathlib.Path(path)
    text = spec_path.read_text(encoding="utf-8")
    try:
        entries = parse_kv_document(text)
    except ValueError as exc:
        raise ModelSpecError(str(exc)) from exc

    kv: dict[str, str] = {}
    for lineno, key, value in entries:
        if key in kv:
            raise ModelSpecError(f"line {lineno}: duplicate key {key!r}")
        kv[key] = value

    kind = kv.pop("model", None)
    if kind is None:
        raise ModelSpecError("missing required key 'model'")

    def take(key: str, convert, default=None, required=False):
        if key not in kv:
            if required:
                raise ModelSpecError(f"{kind}: missing required key {key!r}")
            return default
        raw = kv.pop(key)
        try:
            return convert(raw)
        except ValueError:
            raise ModelSpecError(f"{kind}: unparseable value for {key!r}: {raw!r}") from None

    def boolean(raw: str) -> bool:
        lowered = raw.strip().lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ValueError(raw)

    try:
        if kind == "iid_sign":
            model = IidSignModel(
                p=take("p", float, required=True),
                b1=take("b1", float, required=True),
                b2=take("b2", float, required=True),
                quarters=take("quarters", int, 6),
                loss_points=take("loss_points", int, 5),
            )
        elif kind == "markov_sign":
            model = MarkovSignModel(
                p=take("p", float, required=True),
                m=take("m", float, required=True),
                b1=take("b1", float, required=True),
                b2=take("b2", float, required=True),
                quarters=take("quarters", int, 6),
                loss_points=take("loss_points", int, 5),
                allow_low_momentum=take("allow_low_momentum", boolean, False),
            )
        elif kind == "daily_lattice":
            model = DailyLatticeModel(
                u=take("u", float, required=True),
                d=take("d", float, required=True),
                q=take("q", float, required=True),
                days_per_quarter=take("days_per_quarter", int, required=True),
                quarters=take("quarters", int, 6),
            )
        elif kind == "geometric_walk":
            model = GeometricWalkModel(
                mu=take("mu", float, required=True),
                sigma=take("sigma", float, required=True),
                n_trading_days=take("n_trading_days", int, 381),
                quarters=take("quarters", int, 6),
            )
        elif kind == "bootstrap":
            history_name = kv.pop("history", None)
            if history_name is None:
                raise ModelSpecError("bootstrap: missing required key 'history'")
            history_path = spec_path.parent / history_name
            with open(history_path, "r", encoding="utf-8", newline="") as handle:
                rows = load_price_rows(handle)
            model = BootstrapModel.from_price_rows(
                rows,
                n_trading_days=take("n_trading_days", int, 381),
                quarters=take("quarters", int, 6),
            )
        else:
            raise ModelSpecError(f"unknown model kind {kind!r}")
    except ModelSpecError:
        raise
    except ValueError as exc:
        raise ModelSpecError(f"{kind}: {exc}") from exc

    if kv:
        raise ModelSpecError(f"{kind}: unknown keys {sorted(kv)}")
    return model
