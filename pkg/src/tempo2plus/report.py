"""Trace exports: CSV tables and matplotlib figures."""

from __future__ import annotations

import csv
import io
from fractions import Fraction
from typing import Iterable, Sequence

from .model import PlusProblem, State, TemporalPlan, format_number
from .plus import DiscreteTrace


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    return format_number(v)


def trace_csv(trace: DiscreteTrace, fluents: Sequence[str] | None = None) -> str:
    """One row per discrete state: step, time, then one column per fluent."""
    if not trace.states:
        return ""
    names = list(fluents) if fluents else sorted(trace.states[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "time"] + names)
    for j, s in enumerate(trace.states):
        w.writerow([j, format_number(trace.delta * j)] + [_cell(s[n]) for n in names])
    return buf.getvalue()


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_plus_trace(
    trace: DiscreteTrace,
    problem: PlusProblem,
    path: str,
    numeric: Iterable[str] | None = None,
    boolean: Iterable[str] | None = None,
):
    """Numeric fluents as step lines, selected booleans as a 0/1 raster."""
    plt = _pyplot()
    kinds = problem.kinds
    numeric = list(numeric) if numeric is not None else [n for n, k in kinds.items() if k == "numeric"]
    boolean = list(boolean) if boolean is not None else [
        n for n, k in kinds.items() if k == "boolean" and not n.split("-")[0].endswith("lock")
    ]
    times = [float(trace.delta * j) for j in range(len(trace.states))]

    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(8, 6), sharex=True, gridspec_kw={"height_ratios": [3, 2]}
    )
    for n in numeric:
        top.step(times, [float(s[n]) for s in trace.states], where="post", label=n)
    top.set_ylabel("value")
    if numeric:
        top.legend(loc="upper left", fontsize=7, frameon=False)
    if boolean:
        grid = [[1.0 if s[n] else 0.0 for s in trace.states] for n in boolean]
        extent = (times[0], times[-1] + float(trace.delta), len(boolean) - 0.5, -0.5)
        bottom.imshow(grid, aspect="auto", interpolation="nearest", cmap="Greys", extent=extent)
        bottom.set_yticks(range(len(boolean)))
        bottom.set_yticklabels(boolean, fontsize=7)
    bottom.set_xlabel("time")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_temporal_plan(plan: TemporalPlan, path: str):
    """Gantt chart of a temporal plan; instantaneous actions are markers."""
    plt = _pyplot()
    entries = sorted(plan.entries, key=lambda e: (e.action, e.time))
    rows = sorted({e.action for e in entries})
    fig, ax = plt.subplots(figsize=(8, 0.5 * max(len(rows), 2) + 1))
    for e in entries:
        y = rows.index(e.action)
        if e.duration:
            ax.barh(y, float(e.duration), left=float(e.time), height=0.5, color="0.6", edgecolor="k")
        else:
            ax.plot([float(e.time)], [y], marker="|", markersize=14, color="k")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(rows, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("time")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def temporal_trace_csv(times: Sequence[Fraction], states: Sequence[State]) -> str:
    if not states:
        return ""
    names = sorted(states[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "time"] + names)
    for j, s in enumerate(states):
        w.writerow([j, format_number(times[j])] + [_cell(s[n]) for n in names])
    return buf.getvalue()
