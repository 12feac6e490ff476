"""Render ground problems as PDDL(+) text."""

from __future__ import annotations

from ..model import (
    BOOL,
    NUM,
    And,
    Atom,
    BinOp,
    Compare,
    Const,
    Effect,
    FluentRef,
    Formula,
    Neg,
    Not,
    NumExpr,
    Or,
    PlusProblem,
    Truth,
    format_number,
)
from .names import Sanitizer


def num_text(e: NumExpr, name) -> str:
    if isinstance(e, Const):
        return format_number(e.value)
    if isinstance(e, FluentRef):
        return f"({name(e.name)})"
    if isinstance(e, Neg):
        return f"(- {num_text(e.arg, name)})"
    if isinstance(e, BinOp):
        return f"({e.op} {num_text(e.left, name)} {num_text(e.right, name)})"
    raise TypeError(e)


def formula_text(f: Formula, name) -> str:
    if isinstance(f, Truth):
        return "(and)" if f.value else "(or)"
    if isinstance(f, Atom):
        return f"({name(f.name)})"
    if isinstance(f, Compare):
        return f"({f.op} {num_text(f.left, name)} {num_text(f.right, name)})"
    if isinstance(f, And):
        return "(and " + " ".join(formula_text(a, name) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(formula_text(a, name) for a in f.args) + ")"
    if isinstance(f, Not):
        return f"(not {formula_text(f.arg, name)})"
    raise TypeError(f)


def effect_text(e: Effect, name) -> str:
    if e.is_boolean:
        atom = f"({name(e.target)})"
        return atom if e.value else f"(not {atom})"
    verb = "assign" if e.op == ":=" else "increase"
    return f"({verb} ({name(e.target)}) {num_text(e.value, name)})"


def _effects_text(parts: list[str]) -> str:
    if len(parts) == 1:
        return parts[0]
    return "(and " + " ".join(parts) + ")"


def print_plus(p: PlusProblem, domain_name: str | None = None) -> tuple[str, str]:
    """Return ``(domain_text, problem_text)`` for a ground PDDL+ problem.

    Names that are not legal PDDL identifiers are sanitised deterministically.
    """
    fluent_name = Sanitizer.over(f.name for f in p.fluents)
    op_name = Sanitizer.over(
        [a.name for a in p.actions] + [e.name for e in p.events] + [q.name for q in p.processes]
    )
    dname = domain_name or Sanitizer()(p.name + "-domain")
    pname = Sanitizer()(p.name)

    lines = [f"(define (domain {dname})"]
    lines.append("  (:requirements :negative-preconditions :disjunctive-preconditions")
    lines.append("                 :numeric-fluents :time)")
    bools = [f for f in p.fluents if f.kind == BOOL]
    nums = [f for f in p.fluents if f.kind == NUM]
    if bools:
        lines.append("  (:predicates")
        lines.extend(f"    ({fluent_name(f.name)})" for f in bools)
        lines.append("  )")
    if nums:
        lines.append("  (:functions")
        lines.extend(f"    ({fluent_name(f.name)})" for f in nums)
        lines.append("  )")
    for kind, items in (("action", p.actions), ("event", p.events)):
        for a in items:
            eff = _effects_text([effect_text(e, fluent_name) for e in a.eff])
            lines.append(
                f"  (:{kind} {op_name(a.name)} :parameters ()"
                f" :precondition {formula_text(a.pre, fluent_name)} :effect {eff})"
            )
    for q in p.processes:
        eff = _effects_text(
            [
                f"(increase ({fluent_name(f)}) (* #t {num_text(r, fluent_name)}))"
                for f, r in q.rates
            ]
        )
        lines.append(
            f"  (:process {op_name(q.name)} :parameters ()"
            f" :precondition {formula_text(q.pre, fluent_name)} :effect {eff})"
        )
    lines.append(")")
    domain_text = "\n".join(lines) + "\n"

    init = []
    for f in bools:
        if p.init[f.name]:
            init.append(f"    ({fluent_name(f.name)})")
    for f in nums:
        init.append(f"    (= ({fluent_name(f.name)}) {format_number(p.init[f.name])})")
    plines = [f"(define (problem {pname})", f"  (:domain {dname})", "  (:init"]
    plines.extend(init)
    plines.append("  )")
    plines.append(f"  (:goal {formula_text(p.goal, fluent_name)})")
    plines.append(")")
    problem_text = "\n".join(plines) + "\n"
    return domain_text, problem_text


def plus_name_maps(p: PlusProblem) -> tuple[dict[str, str], dict[str, str]]:
    """The fluent and operator renamings :func:`print_plus` applies."""
    fluent_name = Sanitizer.over(f.name for f in p.fluents)
    op_name = Sanitizer.over(
        [a.name for a in p.actions] + [e.name for e in p.events] + [q.name for q in p.processes]
    )
    return fluent_name.mapping, op_name.mapping
