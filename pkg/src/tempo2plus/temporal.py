"""Validation of temporal plans against durative-action semantics.

A plan is turned into a timeline of happenings (instantaneous actions and
start/end snaps), the induced state sequence is built, and the six
validity conditions are checked: initial state and goal (1), happening
preconditions (2), state progression (3), overall conditions (4),
non-interference (5) and non-self-overlap (6).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .model import (
    DurativeAction,
    EvaluationError,
    InstantAction,
    PlanEntry,
    State,
    TemporalPlan,
    TemporalProblem,
    apply,
    first_false_conjunct,
    format_number,
    holds,
    interferes,
)

INSTANT, START, END = "instant", "start", "end"
_KIND_ORDER = {INSTANT: 0, START: 1, END: 2}

CONDITION_NAMES = {
    1: "initial state and goal",
    2: "happening preconditions",
    3: "state progression",
    4: "overall conditions",
    5: "no interfering actions at the same time",
    6: "no self-overlapping",
}


@dataclass(frozen=True, order=True)
class Snap:
    """One happening: an instantaneous action or the start/end of a durative one."""

    kind: str
    action: str

    def __str__(self):
        return self.action if self.kind == INSTANT else f"{self.action}[{self.kind}]"

    @property
    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.action)


@dataclass
class HappeningTimeline:
    times: list[Fraction]  # t_0 < ... < t_{m-1}, then t_m = t_{m-1} + 1
    happenings: list[frozenset[Snap]]  # H_0 .. H_{m-1}

    @property
    def m(self) -> int:
        return len(self.times) - 1

    def index(self, t: Fraction) -> int:
        return self.times.index(t)


class PlanError(ValueError):
    """The plan refers to actions the problem does not declare."""


@dataclass
class ValidationReport:
    valid: bool
    condition: int | None = None
    reason: str = ""
    step: int | None = None
    actions: list[str] = field(default_factory=list)
    detail: str = ""
    times: list[Fraction] = field(default_factory=list)
    trace: list[State] = field(default_factory=list)

    def summary(self) -> str:
        if self.valid:
            return "valid"
        head = f"invalid: condition {self.condition}" if self.condition else "invalid"
        if self.reason:
            head += f" ({self.reason})"
        if self.step is not None:
            head += f" at step {self.step}"
        if self.actions:
            head += ": " + ", ".join(self.actions)
        if self.detail:
            head += f"; {self.detail}"
        return head

    def to_json(self, with_trace: bool = False) -> dict:
        out = {
            "verdict": "valid" if self.valid else "invalid",
            "condition": self.condition,
            "reason": self.reason or None,
            "step": self.step,
            "actions": self.actions,
            "detail": self.detail or None,
            "times": [format_number(t) for t in self.times],
        }
        if with_trace:
            out["trace"] = [_state_json(s) for s in self.trace]
        return out


def _state_json(s: State) -> dict:
    return {k: (v if isinstance(v, bool) else format_number(v)) for k, v in sorted(s.items())}


def snap_action(problem: TemporalProblem, snap: Snap) -> InstantAction:
    a = problem.action(snap.action)
    if snap.kind == INSTANT:
        return a
    return a.start if snap.kind == START else a.end


def _lookup(problem: TemporalProblem, name: str):
    try:
        return problem.action(name)
    except KeyError:
        raise PlanError(f"unknown action {name!r}") from None


def check_durations(problem: TemporalProblem, plan: TemporalPlan) -> PlanEntry | None:
    """First entry whose duration breaks its action's bounds, if any."""
    for e in sorted(plan.entries):
        a = _lookup(problem, e.action)
        if isinstance(a, DurativeAction):
            if not a.lb <= e.duration <= a.ub:
                return e
        elif e.duration != 0:
            return e
    return None


def build_timeline(problem: TemporalProblem, plan: TemporalPlan) -> HappeningTimeline:
    timed: set[tuple[Fraction, Snap]] = set()
    for e in plan.entries:
        a = _lookup(problem, e.action)
        if isinstance(a, DurativeAction):
            timed.add((e.time, Snap(START, a.name)))
            timed.add((e.time + e.duration, Snap(END, a.name)))
        else:
            timed.add((e.time, Snap(INSTANT, a.name)))
    times = sorted({t for t, _ in timed})
    if not times:
        times = [Fraction(0)]
    happenings = [frozenset(s for t, s in timed if t == tj) for tj in times]
    times.append(times[-1] + 1)
    return HappeningTimeline(times, happenings)


def interfering_pairs(problem: TemporalProblem, snaps) -> list[tuple[Snap, Snap]]:
    ordered = sorted(snaps, key=lambda s: s.sort_key)
    acts = [snap_action(problem, s) for s in ordered]
    out = []
    for i in range(len(ordered)):
        for j in range(i + 1, len(ordered)):
            if interferes(acts[i], acts[j]):
                out.append((ordered[i], ordered[j]))
    return out


def apply_happenings(
    problem: TemporalProblem,
    state: State,
    snaps,
    order: Callable[[Sequence[Snap]], Sequence[Snap]] | None = None,
) -> State:
    """Apply every happening of one step in sequence.

    The default order is instantaneous actions, then starts, then ends, each
    by name.  ``order`` may rearrange that list; for non-interfering
    happenings the result does not depend on it.
    """
    ordered = sorted(snaps, key=lambda s: s.sort_key)
    if order is not None:
        ordered = list(order(ordered))
    for s in ordered:
        state = apply(state, snap_action(problem, s))
    return state


def build_trace(problem, timeline: HappeningTimeline, order=None) -> list[State]:
    trace = [problem.init]
    for snaps in timeline.happenings:
        trace.append(apply_happenings(problem, trace[-1], snaps, order))
    return trace


@dataclass(frozen=True)
class OverallViolation:
    entry: PlanEntry
    state_index: int  # w, the state that breaks the overall condition
    falsifying_step: int  # w - 1, the step whose happenings produced s_w

    def describe(self) -> str:
        return (
            f"overall condition of {self.entry.action} started at "
            f"{format_number(self.entry.time)} fails in state {self.state_index} "
            f"(after step {self.falsifying_step})"
        )


def check_overall_windows(problem, timeline: HappeningTimeline, plan, trace) -> list[OverallViolation]:
    """Overall conditions must hold in s_w for j < w <= k, where step j
    holds the start and step k the end of the instance."""
    out = []
    for e in sorted(plan.entries):
        a = problem.action(e.action)
        if not isinstance(a, DurativeAction):
            continue
        j = timeline.index(e.time)
        k = timeline.index(e.time + e.duration)
        for w in range(j + 1, k + 1):
            if not holds(trace[w], a.overall):
                out.append(OverallViolation(e, w, w - 1))
                break
    return out


def self_overlaps(problem: TemporalProblem, plan: TemporalPlan) -> list[tuple[PlanEntry, PlanEntry]]:
    """Pairs of instances of the same action whose intervals overlap.

    Touching intervals (one ends exactly when the next starts) are allowed.
    """
    by_action: dict[str, list[PlanEntry]] = {}
    for e in plan.entries:
        by_action.setdefault(e.action, []).append(e)
    out = []
    for entries in by_action.values():
        entries.sort()
        for i in range(len(entries)):
            for j in range(i + 1, len(entries)):
                p, q = entries[i], entries[j]
                if not (p.time >= q.time + q.duration or q.time >= p.time + p.duration):
                    out.append((p, q))
    return out


def validate_temporal(problem: TemporalProblem, plan: TemporalPlan, order=None) -> ValidationReport:
    """Decide whether ``plan`` is valid for ``problem``.

    Raises :class:`PlanError` for unknown action names.  ``order`` permutes
    the application order inside each step (see :func:`apply_happenings`).
    """
    bad = check_durations(problem, plan)
    if bad is not None:
        a = problem.action(bad.action)
        bounds = (
            f"[{format_number(a.lb)}, {format_number(a.ub)}]"
            if isinstance(a, DurativeAction)
            else "0"
        )
        return ValidationReport(
            False,
            reason="duration-bounds",
            actions=[bad.action],
            detail=f"duration {format_number(bad.duration)} outside {bounds}",
        )
    timeline = build_timeline(problem, plan)
    report = ValidationReport(False, times=list(timeline.times), trace=[problem.init])
    for j, snaps in enumerate(timeline.happenings):
        state = report.trace[-1]
        pairs = interfering_pairs(problem, snaps)
        if pairs:
            a, b = pairs[0]
            report.condition, report.step = 5, j
            report.actions = [str(a), str(b)]
            report.detail = f"{a} and {b} interfere at time {format_number(timeline.times[j])}"
            return report
        try:
            for s in sorted(snaps, key=lambda s: s.sort_key):
                act = snap_action(problem, s)
                if not holds(state, act.pre):
                    report.condition, report.step = 2, j
                    report.actions = [str(s)]
                    report.detail = f"precondition {first_false_conjunct(state, act.pre)} is false"
                    return report
            report.trace.append(apply_happenings(problem, state, snaps, order))
        except EvaluationError as exc:
            report.condition, report.step = 3, j
            report.reason = "evaluation-error"
            report.detail = str(exc)
            return report
    trace = report.trace
    try:
        violations = check_overall_windows(problem, timeline, plan, trace)
    except EvaluationError as exc:
        report.condition, report.reason, report.detail = 4, "evaluation-error", str(exc)
        return report
    if violations:
        v = violations[0]
        report.condition, report.step = 4, v.falsifying_step
        report.actions = [v.entry.action]
        report.detail = v.describe()
        return report
    overlaps = self_overlaps(problem, plan)
    if overlaps:
        p, q = overlaps[0]
        report.condition = 6
        report.actions = [p.action]
        report.detail = (
            f"{p.action} instances at {format_number(p.time)} and "
            f"{format_number(q.time)} overlap"
        )
        return report
    try:
        goal_ok = holds(trace[-1], problem.goal)
    except EvaluationError as exc:
        report.condition, report.reason, report.detail = 1, "evaluation-error", str(exc)
        return report
    if not goal_ok:
        report.condition, report.step = 1, timeline.m
        report.detail = f"goal conjunct {first_false_conjunct(trace[-1], problem.goal)} is false"
        return report
    report.valid = True
    return report
