"""Command-line front end.

Subcommands: validate, replay, price, sweep, simulate. Exit codes: 0 on
success, 1 for validation or domain errors, 2 for I/O failures. Every
subcommand is deterministic: identical inputs (and seed) produce identical
primary output.
"""
from __future__ import annotations

import argparse
import sys

from . import montecarlo as mc
from .analytic import (
    ScenarioParams,
    TauParams,
    expected_net_payment_iid,
    expected_net_payment_upper_bound,
    find_extrema,
    sweep,
    write_sweep_csv,
)
from .path import breach_date, load_index_path_csv, observe
from .payoff import resolve
from .reference import reference_terms
from .terms import NoteTerms, TermSheetError, cents_to_str, load_term_sheet, validate

__all__ = ["main", "build_parser"]


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _terms_from_args(args) -> NoteTerms:
    if getattr(args, "term_sheet", None):
        return load_term_sheet(args.term_sheet)
    return reference_terms()


def cmd_validate(args) -> int:
    try:
        terms = load_term_sheet(args.term_sheet)
    except TermSheetError as exc:
        for diag in exc.diagnostics:
            print(str(diag), file=sys.stderr)
        return 1
    for diag in validate(terms):
        print(str(diag), file=sys.stderr)
    print(
        f"{args.term_sheet}: OK ({len(terms.observations)} observations, "
        f"principal {cents_to_str(terms.principal_cents)}, "
        f"trigger level {terms.trigger_level:g})"
    )
    return 0


def cmd_replay(args) -> int:
    terms = load_term_sheet(args.term_sheet)
    path = load_index_path_csv(args.prices, start_level=terms.index_starting_level)
    view = observe(path, terms)
    interpretations = ["A", "B"] if args.interpretation == "both" else [args.interpretation]
    outcomes = {tag: resolve(terms, view, tag) for tag in interpretations}

    print(
        f"note: principal {cents_to_str(terms.principal_cents)}, "
        f"start level {terms.index_starting_level:g}, "
        f"trigger level {terms.trigger_level:g} "
        f"({terms.trigger_fraction * 100:.0f}% of start)"
    )
    first_breach = breach_date(path, terms)
    if first_breach is None:
        print("trigger never breached")
    else:
        print(f"trigger first breached {first_breach.isoformat()}")

    close_by_date = dict(path.entries)
    header = f"{'obs':>3}  {'date':<10}  {'close':>10}  {'vs start':<8}  {'vs trigger':<10}"
    for tag in interpretations:
        header += f"  {tag + ': called?':<12}"
    print(header)
    for r, obs_date in enumerate(terms.observation_dates, start=1):
        close = close_by_date[obs_date]
        vs_start = "below" if close < terms.index_starting_level else (
            "above" if close > terms.index_starting_level else "at"
        )
        vs_trigger = "below" if close < terms.trigger_level else (
            "above" if close > terms.trigger_level else "at"
        )
        line = f"{r:>3}  {obs_date.isoformat():<10}  {close:>10.2f}  {vs_start:<8}  {vs_trigger:<10}"
        for tag in interpretations:
            outcome = outcomes[tag]
            if outcome.call_index == r:
                cell = "CALLED"
            elif outcome.call_index is not None and r > outcome.call_index:
                cell = "-"
            else:
                cell = "NOT called"
            line += f"  {cell:<12}"
        print(line)

    for tag in interpretations:
        outcome = outcomes[tag]
        total_return = 100.0 * outcome.net_cents / terms.principal_cents
        print(
            f"interpretation {tag}: {outcome.resolution}"
            + (f" at observation {outcome.call_index}" if outcome.call_index else "")
            + f"; net {cents_to_str(outcome.net_cents)}"
            + f"; settlement {cents_to_str(outcome.gross_cents)}"
            + f" per {cents_to_str(terms.principal_cents)} note"
            + f"; total return {total_return:.1f}%"
            + f"; resolved {outcome.resolution_date.isoformat()}"
        )
    if len(interpretations) == 2:
        diff = outcomes["B"].net_cents - outcomes["A"].net_cents
        print(f"difference (B - A): net {cents_to_str(diff)}")

    if args.plot:
        from .plotting import save_replay_figure

        save_replay_figure(path, terms, args.plot)
        print(f"wrote figure {args.plot}")
    return 0


def cmd_price(args) -> int:
    terms = _terms_from_args(args)
    coupons, principal = terms.coupons, terms.principal
    if args.mode == "iid":
        if args.b1 is None or args.b2 is None:
            raise ValueError("--mode iid requires --b1 and --b2")
        params = ScenarioParams(args.p, args.b1, args.b2)
        value = expected_net_payment_iid(params, coupons, principal)
    else:
        if args.tau is None:
            raise ValueError("--mode bound requires --tau")
        params = TauParams(args.p, args.tau)
        value = expected_net_payment_upper_bound(params, coupons, principal)
    print(f"expected net payment: {value:.2f}")
    if args.extrema:
        extrema = find_extrema(params, coupons, principal, resolution=args.resolution)
        print(f"maximum {extrema.value_max:.2f} at p = {extrema.p_max:.4f}")
        print(f"minimum {extrema.value_min:.2f} at p = {extrema.p_min:.4f}")
    return 0


def cmd_sweep(args) -> int:
    terms = _terms_from_args(args)
    result = sweep(
        args.mode,
        args.points,
        terms.coupons,
        terms.principal,
        b1=args.b1,
        b2=args.b2,
        tau=args.tau,
    )
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        write_sweep_csv(result, handle)
    print(f"wrote {args.mode} sweep ({len(result.rows)} rows) to {args.out}")
    if result.extrema:
        for name in ("global_max", "global_min"):
            p, tau, value = result.extrema[name]
            print(f"{name}: p={p:.6f} tau={tau:.6f} value={value:.6f}")
    if args.plot:
        from .plotting import save_sweep_figure

        fixed = []
        if args.b1 is not None:
            fixed.append(f"b1={args.b1:g}")
        if args.b2 is not None:
            fixed.append(f"b2={args.b2:g}")
        if args.tau is not None:
            fixed.append(f"tau={args.tau:g}")
        save_sweep_figure(result, args.plot, subtitle=", ".join(fixed))
        print(f"wrote figure {args.plot}")
    return 0


def cmd_simulate(args) -> int:
    terms = _terms_from_args(args)
    model = mc.load_model_spec(args.model)
    print(f"model: {model!r}")
    interpretations = ["A", "B"] if args.interpretation == "both" else [args.interpretation]
    for tag in interpretations:
        est = mc.estimate_expected_payment(
            model, terms, tag, args.n, args.seed, block_size=args.block_size
        )
        print(
            f"interpretation {tag}: mean {est.mean:.4f}, std error {est.std_error:.4f}, "
            f"95% CI [{est.ci95[0]:.4f}, {est.ci95[1]:.4f}]  "
            f"(n={est.n_paths}, seed={est.seed})"
        )

    try:
        params = mc.estimate_model_params(model, args.n, args.seed, block_size=args.block_size)
    except mc.EstimationError as exc:
        print(f"parameter estimation skipped: {exc}")
        params = None
    if params is not None:
        print(
            f"estimated params: p={params.p:.4f} (se {params.p_se:.4f}), "
            f"b1={params.b1:.4f} (se {params.b1_se:.4f}), "
            f"b2={params.b2:.4f} (se {params.b2_se:.4f}), "
            f"tau={params.tau:.4f} (se {params.tau_se:.4f})"
        )
        iid_value = expected_net_payment_iid(
            ScenarioParams(params.p, params.b1, params.b2), terms.coupons, terms.principal
        )
        print(f"closed-form at estimates: iid {iid_value:.4f}", end="")
        try:
            bound_value = expected_net_payment_upper_bound(
                TauParams(params.p, params.tau), terms.coupons, terms.principal
            )
            print(f", upper bound {bound_value:.4f}")
        except ValueError:
            print(", upper bound n/a (estimated p + tau > 1)")

    if model.kind == "daily_lattice" and model.n_days <= mc.MAX_ENUMERABLE_STEPS:
        exact = mc.enumerate_exact(model, terms)
        print(
            f"exact enumeration ({exact.n_paths} paths): "
            f"E[net A] = {exact.expected_net_a:.6f}, E[net B] = {exact.expected_net_b:.6f}"
        )
        b1 = "n/a" if exact.b1 is None else f"{exact.b1:.6f}"
        b2 = "n/a" if exact.b2 is None else f"{exact.b2:.6f}"
        print(f"exact params: p={exact.p:.6f}, b1={b1}, b2={b2}, tau={exact.tau:.6f}")
        report = mc.verify_inequalities(model, terms)
        print("inequality checks:")
        print(report.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autocall",
        description="Payoff analysis for autocallable reverse convertible notes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a term-sheet file")
    p_validate.add_argument("term_sheet")
    p_validate.set_defaults(func=cmd_validate)

    p_replay = sub.add_parser("replay", help="settle a note against a price history")
    p_replay.add_argument("term_sheet")
    p_replay.add_argument("prices", help="CSV with header date,close")
    p_replay.add_argument("--interpretation", choices=("A", "B", "both"), default="both")
    p_replay.add_argument("--plot", metavar="PATH", help="also render the path to an image")
    p_replay.set_defaults(func=cmd_replay)

    p_price = sub.add_parser("price", help="evaluate the closed-form expected payment")
    p_price.add_argument("--mode", choices=("iid", "bound"), required=True)
    p_price.add_argument("--p", type=float, required=True)
    p_price.add_argument("--b1", type=float)
    p_price.add_argument("--b2", type=float)
    p_price.add_argument("--tau", type=float)
    p_price.add_argument("--extrema", action="store_true", help="also search extrema over p")
    p_price.add_argument("--resolution", type=int, default=2001)
    p_price.add_argument(
        "--term-sheet", help="term sheet supplying the coupon schedule (defaults to the bundled sample)"
    )
    p_price.set_defaults(func=cmd_price)

    p_sweep = sub.add_parser("sweep", help="tabulate the formulas over a grid")
    p_sweep.add_argument("--mode", choices=("iid", "bound", "surface"), required=True)
    p_sweep.add_argument("--points", type=int, default=101)
    p_sweep.add_argument("--b1", type=float)
    p_sweep.add_argument("--b2", type=float)
    p_sweep.add_argument("--tau", type=float)
    p_sweep.add_argument("--out", required=True, metavar="CSV")
    p_sweep.add_argument("--plot", metavar="PATH", help="also render the sweep to an image")
    p_sweep.add_argument(
        "--term-sheet", help="term sheet supplying the coupon schedule (defaults to the bundled sample)"
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("simulate", help="Monte Carlo estimate under a market model")
    p_sim.add_argument("--model", required=True, metavar="SPEC")
    p_sim.add_argument("--term-sheet", help="term sheet (defaults to the bundled sample)")
    p_sim.add_argument("--interpretation", choices=("A", "B", "both"), default="both")
    p_sim.add_argument("--n", type=int, default=100_000)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--block-size", type=int, default=mc.DEFAULT_BLOCK_SIZE)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        _fail(str(exc))
        return 2
    except TermSheetError as exc:
        for diag in exc.diagnostics:
            print(str(diag), file=sys.stderr)
        return 1
    except ValueError as exc:
        _fail(str(exc))
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
