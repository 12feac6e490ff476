"""Translate plans between a temporal problem and its compiled PDDL+ form."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from . import compiler as c
from .compiler import CompilationArtifacts
from .model import DurativeAction, PlanEntry, PlusPlan, TemporalPlan, TemporalProblem, format_number
from .temporal import END, INSTANT, START, build_timeline, validate_temporal

log = logging.getLogger(__name__)


class PlanStructureError(ValueError):
    pass


@dataclass(frozen=True)
class DeltaChoice:
    delta: Fraction
    quotients: tuple[tuple[Fraction, int], ...]

    def to_json(self) -> dict:
        return {
            "delta": format_number(self.delta),
            "justification": [
                {"time": format_number(t), "quotient": q} for t, q in self.quotients
            ],
        }


def select_delta(times: Iterable) -> DeltaChoice:
    """Largest-numerator quantum dividing every time: the gcd of the nonzero
    numerators over the lcm of their denominators (``1`` when all times are 0)."""
    ts = sorted({Fraction(t) for t in times})
    if any(t < 0 for t in ts):
        raise ValueError("times must be non-negative")
    nonzero = [t for t in ts if t != 0]
    if not nonzero:
        delta = Fraction(1)
    else:
        g = 0
        den = 1
        for t in nonzero:
            g = math.gcd(g, t.numerator)
            den = den * t.denominator // math.gcd(den, t.denominator)
        delta = Fraction(g, den)
    quotients = []
    for t in ts:
        q = t / delta
        if q.denominator != 1:
            raise ArithmeticError(f"delta {delta} does not divide {t}")
        quotients.append((t, int(q)))
    return DeltaChoice(delta, tuple(quotients))


def lift_plan(artifacts: CompilationArtifacts, plus_plan: PlusPlan) -> TemporalPlan:
    """Read a compiled-problem plan back as a temporal plan.

    Fixed-duration starts get their fixed duration; each variable-duration
    start is paired with the next end of the same action in plan order.
    """
    problem = artifacts.source
    entries: set[PlanEntry] = set()
    open_starts: dict[str, list[Fraction]] = {}
    steps = list(plus_plan.steps)
    for t, name in steps:
        try:
            origin = artifacts.origin(name)
        except KeyError:
            raise PlanStructureError(f"unknown compiled action {name!r}") from None
        if origin.role == c.INSTANT:
            entries.add(PlanEntry(t, origin.source, 0))
        elif origin.role == c.START:
            a = problem.action(origin.source)
            if a.fixed:
                entries.add(PlanEntry(t, a.name, a.lb))
            else:
                open_starts.setdefault(a.name, []).append(t)
        elif origin.role == c.END_VAR:
            pending = open_starts.get(origin.source)
            if not pending:
                raise PlanStructureError(f"end of {origin.source} at {t} has no matching start")
            start = pending.pop(0)
            if pending and any(start < s < t for s in pending):
                raise PlanStructureError(
                    f"another start of {origin.source} lies between {start} and {t}"
                )
            entries.add(PlanEntry(start, origin.source, t - start))
        else:
            raise PlanStructureError(f"{name} ({origin.role}) is not a plan action")
    unmatched = {a: ts for a, ts in open_starts.items() if ts}
    if unmatched:
        a, ts = next(iter(sorted(unmatched.items())))
        raise PlanStructureError(f"start of {a} at {format_number(ts[0])} is never ended")
    return TemporalPlan(frozenset(entries))


@dataclass
class Lowering:
    plan: PlusPlan
    delta: DeltaChoice
    warnings: list[str] = field(default_factory=list)


# ends first (their overall windows close before same-time effects), then
# instantaneous actions, then starts (their windows open after)
_LOWER_ORDER = {END: 0, INSTANT: 1, START: 2}


def lower_plan(
    problem: TemporalProblem,
    artifacts: CompilationArtifacts,
    plan: TemporalPlan,
    check: bool = True,
) -> Lowering:
    """Schedule every happening of ``plan`` as a compiled action.

    Fixed-duration ends are left to their events.  The makespan is one time
    unit after the last happening's final time.
    """
    warnings = []
    if check:
        report = validate_temporal(problem, plan)
        if not report.valid:
            msg = f"lowering an invalid temporal plan: {report.summary()}"
            log.warning(msg)
            warnings.append(msg)
    timeline = build_timeline(problem, plan)
    t_last = timeline.times[-1]
    makespan = t_last + 1
    choice = select_delta(list(timeline.times) + [makespan])
    steps = []
    for t, snaps in zip(timeline.times, timeline.happenings):
        ordered = sorted(snaps, key=lambda s: (_LOWER_ORDER[s.kind], s.action))
        for s in ordered:
            a = problem.action(s.action)
            if s.kind == INSTANT:
                steps.append((t, artifacts.compiled_name(a.name, c.INSTANT)))
            elif s.kind == START:
                steps.append((t, artifacts.compiled_name(a.name, c.START)))
            elif isinstance(a, DurativeAction) and not a.fixed:
                steps.append((t, artifacts.compiled_name(a.name, c.END_VAR)))
    return Lowering(PlusPlan(tuple(steps), makespan), choice, warnings)
