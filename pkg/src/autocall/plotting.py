"""File-output matplotlib rendering for sweep tables and replay paths."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.dates as mdates
import matplotlib.pyplot as plt

from .analytic import SweepResult
from .path import IndexPath, breach_date
from .terms import NoteTerms

__all__ = ["save_sweep_figure", "save_replay_figure"]

_FIGSIZE = (8.0, 4.8)
_DPI = 150


def save_sweep_figure(result: SweepResult, out_path, subtitle: str = "") -> None:
    """Render a sweep as a line chart (iid/bound) or a surface map."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    if len(result.header) == 2:
        ps = [row[0] for row in result.rows]
        values = [row[1] for row in result.rows]
        ax.plot(ps, values, lw=1.8)
        ax.axhline(0.0, color="0.4", lw=0.8, ls="--")
        ax.set_xlabel("p (per-observation call probability)")
        ax.set_ylabel("expected net payment per note")
        title = f"{result.mode} expected net payment"
    else:
        ps = [row[0] for row in result.rows]
        taus = [row[1] for row in result.rows]
        values = [row[2] for row in result.rows]
        shading = ax.tripcolor(ps, taus, values, shading="gouraud", cmap="viridis")
        fig.colorbar(shading, ax=ax, label="expected net payment per note")
        if result.extrema:
            best = result.extrema["global_max"]
            worst = result.extrema["global_min"]
            ax.plot(best[0], best[1], "r^", ms=8, label=f"max {best[2]:.2f}")
            ax.plot(worst[0], worst[1], "rv", ms=8, label=f"min {worst[2]:.2f}")
            ax.legend(loc="upper right")
        ax.set_xlabel("p (per-observation call probability)")
        ax.set_ylabel("tau (probability final return < -1/2)")
        title = "upper bound on expected net payment"
    if subtitle:
        title = f"{title}  [{subtitle}]"
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)


def save_replay_figure(path: IndexPath, terms: NoteTerms, out_path) -> None:
    """Render a replay: daily closes, start/trigger levels, observations."""
    dates = [d for d, _ in path.entries]
    closes = [c for _, c in path.entries]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(dates, closes, lw=1.2, color="steelblue", label="daily close")
    ax.axhline(terms.index_starting_level, color="0.3", lw=1.0, ls="--", label="starting level")
    ax.axhline(terms.trigger_level, color="firebrick", lw=1.0, ls="--", label="trigger level")

    close_by_date = dict(path.entries)
    obs_dates = [d for d in terms.observation_dates if d in close_by_date]
    ax.plot(
        obs_dates,
        [close_by_date[d] for d in obs_dates],
        "o",
        color="darkorange",
        ms=6,
        label="observation dates",
    )
    first_breach = breach_date(path, terms)
    if first_breach is not None:
        ax.axvline(first_breach, color="firebrick", lw=0.8, alpha=0.6)
        ax.annotate(
            f"first breach {first_breach.isoformat()}",
            xy=(first_breach, terms.trigger_level),
            xytext=(5, 10),
            textcoords="offset points",
            fontsize=8,
            color="firebrick",
        )
    ax.xaxis.set_major_formatter(mdates.DateFormatter("%Y-%m"))
    ax.set_ylabel("index level")
    ax.set_title("note replay")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
