"""Discrete-time PDDL+ plan validation.

Time advances in quanta of ``delta``.  At each step the state is first
event-completed, then the step's actions are applied in plan order, each
followed by another event completion; finally every active process adds
``rate * delta`` to its fluent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .model import (
    EvaluationError,
    Event,
    InstantAction,
    PlusPlan,
    PlusProblem,
    Process,
    State,
    apply,
    evaluate,
    first_false_conjunct,
    format_number,
    holds,
    to_fraction,
)


class DivergenceError(RuntimeError):
    """Event completion did not reach a fixed point."""

    def __init__(self, message: str, fired: list[str] | None = None):
        super().__init__(message)
        self.fired = fired or []


@dataclass(frozen=True)
class LogEntry:
    kind: str  # "event" or "action"
    name: str
    state: State  # state right after this firing/application


@dataclass
class StepLog:
    step: int
    time: Fraction
    head: State  # s_j before event completion
    entries: list[LogEntry] = field(default_factory=list)

    @property
    def end(self) -> State:
        return self.entries[-1].state if self.entries else self.head


@dataclass
class DiscreteTrace:
    delta: Fraction
    states: list[State] = field(default_factory=list)
    steps: list[StepLog] = field(default_factory=list)

    def fired(self, name: str) -> list[tuple[int, LogEntry]]:
        return [(log.step, e) for log in self.steps for e in log.entries if e.name == name]


@dataclass
class PlusFailure:
    phase: str  # well-formedness, event-completion, action, goal
    detail: str
    step: int | None = None
    name: str | None = None


@dataclass
class PlusReport:
    valid: bool
    delta: Fraction
    steps: int | None
    failure: PlusFailure | None = None
    trace: DiscreteTrace | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def ill_formed(self) -> bool:
        return self.failure is not None and self.failure.phase == "well-formedness"

    def summary(self) -> str:
        if self.valid:
            return "valid"
        f = self.failure
        where = f" at step {f.step}" if f.step is not None else ""
        return f"invalid ({f.phase}{where}): {f.detail}"

    def to_json(self, with_trace: bool = False) -> dict:
        out = {
            "verdict": "valid" if self.valid else ("ill-formed" if self.ill_formed else "invalid"),
            "delta": format_number(self.delta),
            "steps": self.steps,
            "failure": None,
            "warnings": self.warnings,
        }
        if self.failure:
            out["failure"] = {
                "phase": self.failure.phase,
                "step": self.failure.step,
                "name": self.failure.name,
                "detail": self.failure.detail,
            }
        if with_trace and self.trace:
            out["trace"] = [
                {
                    "step": log.step,
                    "time": format_number(log.time),
                    "head": _state_json(log.head),
                    "log": [
                        {"kind": e.kind, "name": e.name, "state": _state_json(e.state)}
                        for e in log.entries
                    ],
                }
                for log in self.trace.steps
            ]
            out["states"] = [_state_json(s) for s in self.trace.states]
        return out


def _state_json(s: State) -> dict:
    return {k: (v if isinstance(v, bool) else format_number(v)) for k, v in sorted(s.items())}


def event_completion(
    state: State, events: Sequence[Event], max_firings: int | None = None
) -> tuple[State, list[tuple[str, State]]]:
    """Fire applicable events until none applies.

    The first applicable event in ``events`` order fires each round.
    Raises :class:`DivergenceError` when a state repeats or more than
    ``max_firings`` (default ``4 * len(events)``) events fire.
    """
    if max_firings is None:
        max_firings = 4 * len(events)
    log: list[tuple[str, State]] = []
    seen = {state}
    while True:
        ev = next((e for e in events if holds(state, e.pre)), None)
        if ev is None:
            return state, log
        state = apply(state, ev)
        log.append((ev.name, state))
        if state in seen:
            raise DivergenceError(f"event completion cycles (via {ev.name})", [n for n, _ in log])
        seen.add(state)
        if len(log) > max_firings:
            raise DivergenceError(
                f"event completion exceeded {max_firings} firings", [n for n, _ in log]
            )


def completion_fixed_points(state: State, events: Sequence[Event], limit: int = 10_000) -> set[State]:
    """Every fixed point reachable by firing applicable events in any order.

    Used to detect order-sensitive event sets.  Raises
    :class:`DivergenceError` past ``limit`` explored states.
    """
    result, seen, stack = set(), {state}, [state]
    while stack:
        s = stack.pop()
        succ = [apply(s, e) for e in events if holds(s, e.pre)]
        if not succ:
            result.add(s)
        for n in succ:
            if n not in seen:
                seen.add(n)
                stack.append(n)
                if len(seen) > limit:
                    raise DivergenceError("too many states while enumerating event orders")
    return result


class ActionNotApplicable(Exception):
    def __init__(self, name: str, conjunct):
        super().__init__(f"{name} is not applicable: {conjunct} is false")
        self.name = name
        self.conjunct = conjunct


def superdense_step(
    state: State,
    actions: Sequence[InstantAction],
    events: Sequence[Event],
    log: StepLog | None = None,
    max_firings: int | None = None,
) -> State:
    """Event-complete, then apply each action and event-complete again.

    Applicability is checked in the state immediately before each action.
    """

    def complete(s):
        s, fired = event_completion(s, events, max_firings)
        if log is not None:
            log.entries.extend(LogEntry("event", n, st) for n, st in fired)
        return s

    state = complete(state)
    for a in actions:
        if not holds(state, a.pre):
            raise ActionNotApplicable(a.name, first_false_conjunct(state, a.pre))
        state = apply(state, a)
        if log is not None:
            log.entries.append(LogEntry("action", a.name, state))
        state = complete(state)
    return state


def integrate_processes(state: State, processes: Sequence[Process], delta: Fraction) -> State:
    """One Euler step: each active process adds ``rate * delta``, rates read
    in ``state``; boolean fluents are unchanged."""
    changes: dict[str, Fraction] = {}
    for p in processes:
        if not holds(state, p.pre):
            continue
        for f, rate in p.rates:
            r = evaluate(state, rate)
            changes[f] = changes.get(f, state[f]) + r * delta
    return state.updated(changes)


def _well_formed(plan: PlusPlan, delta: Fraction) -> str | None:
    if plan.makespan < 0:
        return "negative makespan"
    if plan.makespan % delta != 0:
        return f"makespan {format_number(plan.makespan)} is not a multiple of delta {format_number(delta)}"
    prev = None
    for t, name in plan.steps:
        if t < 0:
            return f"negative time for {name}"
        if t % delta != 0:
            return f"time {format_number(t)} of {name} is not a multiple of delta {format_number(delta)}"
        if t > plan.makespan:
            return f"time {format_number(t)} of {name} is after the makespan"
        if prev is not None and t < prev:
            return "plan steps are not sorted by time"
        prev = t
    return None


def validate_plus(
    problem: PlusProblem,
    plan: PlusPlan,
    delta=1,
    max_firings: int | None = None,
    check_confluence: bool = False,
) -> PlusReport:
    """Simulate ``plan`` on ``problem`` with time quantum ``delta``.

    Actions scheduled exactly at the makespan are checked for applicability
    but cannot affect the goal, which is evaluated in the state at the
    makespan.  Raises :class:`DivergenceError` if an event completion does
    not terminate and ``ValueError`` for a non-positive ``delta``.
    """
    delta = to_fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    problem_actions = {a.name: a for a in problem.actions}
    report = PlusReport(False, delta, None)
    for _, name in plan.steps:
        if name not in problem_actions:
            report.failure = PlusFailure("well-formedness", f"unknown action {name!r}", name=name)
            return report
    problem_err = _well_formed(plan, delta)
    if problem_err:
        report.failure = PlusFailure("well-formedness", problem_err)
        return report
    m = int(plan.makespan / delta)
    report.steps = m
    trace = DiscreteTrace(delta, [problem.init])
    report.trace = trace
    by_step: dict[int, list[InstantAction]] = {}
    for t, name in plan.steps:
        by_step.setdefault(int(t / delta), []).append(problem_actions[name])

    for j in range(m + 1):
        if j == m and j not in by_step:
            break
        head = trace.states[-1]
        log = StepLog(j, delta * j, head)
        trace.steps.append(log)
        if check_confluence:
            try:
                points = completion_fixed_points(head, problem.events)
            except DivergenceError as exc:
                report.warnings.append(f"step {j}: {exc}")
            else:
                if len(points) > 1:
                    report.warnings.append(
                        f"step {j}: event completion is order-sensitive "
                        f"({len(points)} fixed points)"
                    )
        try:
            end = superdense_step(head, by_step.get(j, []), problem.events, log, max_firings)
        except ActionNotApplicable as exc:
            report.failure = PlusFailure("action", str(exc), j, exc.name)
            return report
        except EvaluationError as exc:
            report.failure = PlusFailure("evaluation", str(exc), j)
            return report
        if j == m:
            break
        try:
            trace.states.append(integrate_processes(end, problem.processes, delta))
        except EvaluationError as exc:
            report.failure = PlusFailure("evaluation", str(exc), j)
            return report

    final = trace.states[m]
    try:
        goal_ok = holds(final, problem.goal)
    except EvaluationError as exc:
        report.failure = PlusFailure("evaluation", str(exc), m)
        return report
    if not goal_ok:
        report.failure = PlusFailure(
            "goal", f"goal conjunct {first_false_conjunct(final, problem.goal)} is false", m
        )
        return report
    report.valid = True
    return report
