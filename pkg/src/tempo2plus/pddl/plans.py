"""VAL-style plan files.

Temporal plans: one ``<time>: (<name> <args>) [<duration>]`` per line.
PDDL+ plans: ``<time>: (<name> <args>)`` lines plus ``;; makespan <t_e>``.
Times may be decimals or ``p/q`` rationals.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..model import PlanEntry, PlusPlan, TemporalPlan, format_number

_LINE = re.compile(
    r"^\s*(?P<time>[^:\s]+)\s*:\s*\((?P<body>[^()]*)\)\s*(\[\s*(?P<dur>[^\]\s]+)\s*\])?\s*$"
)
_MAKESPAN = re.compile(r"^\s*;+\s*makespan\s*:?\s*(?P<t>\S+)\s*$", re.IGNORECASE)


class PlanFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _rational(text: str, lineno: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise PlanFormatError(f"not a rational number: {text!r}", lineno) from None


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        yield lineno, raw


def _action_name(body: str) -> str:
    return " ".join(body.lower().split())


def parse_temporal_plan(text: str) -> TemporalPlan:
    entries = set()
    for lineno, raw in _lines(text):
        line = raw.split(";", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m or not m.group("body").strip():
            raise PlanFormatError(f"malformed plan line: {raw.strip()!r}", lineno)
        t = _rational(m.group("time"), lineno)
        d = _rational(m.group("dur"), lineno) if m.group("dur") else Fraction(0)
        if t < 0 or d < 0:
            raise PlanFormatError("negative time or duration", lineno)
        entries.add(PlanEntry(t, _action_name(m.group("body")), d))
    return TemporalPlan(frozenset(entries))


def parse_plus_plan(text: str) -> PlusPlan:
    steps = []
    makespan = None
    for lineno, raw in _lines(text):
        mk = _MAKESPAN.match(raw)
        if mk:
            makespan = _rational(mk.group("t"), lineno)
            continue
        line = raw.split(";", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m or not m.group("body").strip():
            raise PlanFormatError(f"malformed plan line: {raw.strip()!r}", lineno)
        if m.group("dur"):
            raise PlanFormatError("PDDL+ plan steps carry no duration", lineno)
        t = _rational(m.group("time"), lineno)
        if t < 0:
            raise PlanFormatError("negative time", lineno)
        steps.append((t, _action_name(m.group("body"))))
    if makespan is None:
        makespan = max((t for t, _ in steps), default=Fraction(0))
    return PlusPlan(tuple(steps), makespan)


def print_temporal_plan(plan: TemporalPlan) -> str:
    out = []
    for e in sorted(plan.entries, key=lambda e: (e.time, e.action, e.duration)):
        out.append(f"{format_number(e.time)}: ({e.action}) [{format_number(e.duration)}]")
    return "\n".join(out) + ("\n" if out else "")


def print_plus_plan(plan: PlusPlan) -> str:
    # stable sort keeps the superdense order of same-time steps
    steps = sorted(plan.steps, key=lambda s: s[0])
    out = [f"{format_number(t)}: ({a})" for t, a in steps]
    out.append(f";; makespan {format_number(plan.makespan)}")
    return "\n".join(out) + "\n"
