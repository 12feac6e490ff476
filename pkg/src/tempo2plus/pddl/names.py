"""Renaming helpers shared by grounding, printing and the compiler."""

from __future__ import annotations

import re
from typing import Callable

from ..model import (
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
    Truth,
)

_LEGAL = re.compile(r"^[a-z][a-z0-9_\-]*$")


def rename_num(e: NumExpr, fn: Callable[[str], str]) -> NumExpr:
    if isinstance(e, FluentRef):
        return FluentRef(fn(e.name))
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(rename_num(e.arg, fn))
    return BinOp(e.op, rename_num(e.left, fn), rename_num(e.right, fn))


def rename_formula(f: Formula, fn: Callable[[str], str]) -> Formula:
    if isinstance(f, Atom):
        return Atom(fn(f.name))
    if isinstance(f, Truth):
        return f
    if isinstance(f, Compare):
        return Compare(f.op, rename_num(f.left, fn), rename_num(f.right, fn))
    if isinstance(f, And):
        return And(tuple(rename_formula(a, fn) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(rename_formula(a, fn) for a in f.args))
    if isinstance(f, Not):
        return Not(rename_formula(f.arg, fn))
    raise TypeError(f"not a formula: {f!r}")


def rename_effect(e: Effect, fn: Callable[[str], str]) -> Effect:
    value = e.value if e.is_boolean else rename_num(e.value, fn)
    return Effect(fn(e.target), e.op, value)


def is_legal(name: str) -> bool:
    return bool(_LEGAL.match(name))


class Sanitizer:
    """Deterministic map from arbitrary names to legal, distinct PDDL names."""

    def __init__(self, reserved=()):
        self._map: dict[str, str] = {}
        self._used: set[str] = set(reserved)

    def __call__(self, name: str) -> str:
        if name in self._map:
            return self._map[name]
        base = re.sub(r"[^a-z0-9_\-]", "_", name.lower().strip())
        if not base or not base[0].isalpha():
            base = "n_" + base
        candidate, k = base, 1
        while candidate in self._used:
            k += 1
            candidate = f"{base}_{k}"
        self._used.add(candidate)
        self._map[name] = candidate
        return candidate

    @property
    def mapping(self) -> dict[str, str]:
        return dict(self._map)

    @classmethod
    def over(cls, names, reserved=()) -> "Sanitizer":
        """Sanitizer that keeps already-legal names unchanged where possible."""
        s = cls(reserved)
        names = list(names)
        for n in names:
            if is_legal(n) and n not in s._used:
                s._map[n] = n
                s._used.add(n)
        for n in names:
            s(n)
        return s
