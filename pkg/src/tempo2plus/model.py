"""Ground data model: expressions, formulas, effects, actions, states and plans.

Every numeric value is a :class:`fractions.Fraction`.  Fluents are referred
to by name; the owning problem records each fluent's kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

BOOL = "boolean"
NUM = "numeric"

Value = Union[bool, Fraction]


class ModelError(ValueError):
    """A model object violates a structural invariant."""


class EvaluationError(ArithmeticError):
    """Raised when an expression cannot be evaluated (division by zero)."""

    def __init__(self, message: str, expr: object = None):
        super().__init__(message)
        self.expr = expr


def to_fraction(value) -> Fraction:
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats go through their shortest repr so 0.1 stays 1/10
        return Fraction(repr(value))
    return Fraction(value)


# --------------------------------------------------------------------------
# Numeric expressions


class NumExpr:
    __slots__ = ()

    def fluents(self) -> frozenset[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(NumExpr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", to_fraction(self.value))

    def fluents(self) -> frozenset[str]:
        return frozenset()

    def __str__(self):
        return format_number(self.value)


@dataclass(frozen=True)
class FluentRef(NumExpr):
    name: str

    def fluents(self) -> frozenset[str]:
        return frozenset((self.name,))

    def __str__(self):
        return self.name


ARITH_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class BinOp(NumExpr):
    op: str
    left: NumExpr
    right: NumExpr

    def __post_init__(self):
        if self.op not in ARITH_OPS:
            raise ModelError(f"unknown arithmetic operator {self.op!r}")

    def fluents(self) -> frozenset[str]:
        return self.left.fluents() | self.right.fluents()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Neg(NumExpr):
    arg: NumExpr

    def fluents(self) -> frozenset[str]:
        return self.arg.fluents()

    def __str__(self):
        return f"-{self.arg}"


def num(value) -> NumExpr:
    """Coerce a number or fluent name into a :class:`NumExpr`."""
    if isinstance(value, NumExpr):
        return value
    if isinstance(value, str):
        return FluentRef(value)
    return Const(to_fraction(value))


# --------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    def fluents(self) -> frozenset[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class Truth(Formula):
    value: bool

    def fluents(self) -> frozenset[str]:
        return frozenset()

    def __str__(self):
        return "T" if self.value else "F"


TRUE = Truth(True)
FALSE = Truth(False)


@dataclass(frozen=True)
class Atom(Formula):
    """A boolean fluent used as a formula."""

    name: str

    def fluents(self) -> frozenset[str]:
        return frozenset((self.name,))

    def __str__(self):
        return self.name


COMPARATORS = ("<", "<=", "=", ">=", ">")


@dataclass(frozen=True)
class Compare(Formula):
    op: str
    left: NumExpr
    right: NumExpr

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise ModelError(f"unknown comparator {self.op!r}")

    def fluents(self) -> frozenset[str]:
        return self.left.fluents() | self.right.fluents()

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def fluents(self) -> frozenset[str]:
        return frozenset().union(*(a.fluents() for a in self.args))

    def __str__(self):
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def fluents(self) -> frozenset[str]:
        return frozenset().union(*(a.fluents() for a in self.args))

    def __str__(self):
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def fluents(self) -> frozenset[str]:
        return self.arg.fluents()

    def __str__(self):
        return f"!{self.arg}"


def conj(*parts: Formula) -> Formula:
    """Flattened conjunction; drops ``TRUE``, collapses on ``FALSE``, removes repeats."""
    out: list[Formula] = []
    for p in parts:
        items = p.args if isinstance(p, And) else (p,)
        for q in items:
            if q == TRUE or q in out:
                continue
            if q == FALSE:
                return FALSE
            out.append(q)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*parts: Formula) -> Formula:
    out: list[Formula] = []
    for p in parts:
        items = p.args if isinstance(p, Or) else (p,)
        for q in items:
            if q == FALSE or q in out:
                continue
            if q == TRUE:
                return TRUE
            out.append(q)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Truth):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def conjuncts(f: Formula) -> tuple[Formula, ...]:
    if f == TRUE:
        return ()
    return f.args if isinstance(f, And) else (f,)


# --------------------------------------------------------------------------
# Effects and actions

ASSIGN = ":="
INCREASE = "+="


@dataclass(frozen=True)
class Effect:
    """``target := value`` or ``target += value``.

    Boolean targets only take ``:=`` with a ``bool`` value.
    """

    target: str
    op: str
    value: Union[bool, NumExpr]

    def __post_init__(self):
        if self.op not in (ASSIGN, INCREASE):
            raise ModelError(f"unknown effect operator {self.op!r}")
        if isinstance(self.value, bool):
            if self.op != ASSIGN:
                raise ModelError(f"boolean increase on {self.target}")
        elif not isinstance(self.value, NumExpr):
            object.__setattr__(self, "value", num(self.value))

    @property
    def is_boolean(self) -> bool:
        return isinstance(self.value, bool)

    def reads(self) -> frozenset[str]:
        return frozenset() if self.is_boolean else self.value.fluents()

    def __str__(self):
        v = ("T" if self.value else "F") if self.is_boolean else str(self.value)
        return f"{self.target} {self.op} {v}"


def set_true(name: str) -> Effect:
    return Effect(name, ASSIGN, True)


def set_false(name: str) -> Effect:
    return Effect(name, ASSIGN, False)


def assign(name: str, value) -> Effect:
    return Effect(name, ASSIGN, num(value))


def increase(name: str, value) -> Effect:
    return Effect(name, INCREASE, num(value))


def _check_effects(owner: str, effects: tuple[Effect, ...]) -> None:
    assigned: set[str] = set()
    increased: set[str] = set()
    for e in effects:
        if e.op == ASSIGN:
            if e.target in assigned:
                raise ModelError(f"{owner}: more than one assignment to {e.target}")
            assigned.add(e.target)
        else:
            increased.add(e.target)
    both = assigned & increased
    if both:
        raise ModelError(f"{owner}: fluent both assigned and increased: {sorted(both)}")


@dataclass(frozen=True)
class InterferenceSets:
    read: frozenset[str]
    assign: frozenset[str]
    increase: frozenset[str]

    @property
    def write(self) -> frozenset[str]:
        return self.assign | self.increase


@dataclass(frozen=True)
class InstantAction:
    name: str
    pre: Formula = TRUE
    eff: tuple[Effect, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "eff", tuple(self.eff))
        _check_effects(self.name, self.eff)


# events share the structure of instantaneous actions
@dataclass(frozen=True)
class Event(InstantAction):
    pass


def interference_sets(a: InstantAction) -> InterferenceSets:
    read = set(a.pre.fluents())
    assigned, increased = set(), set()
    for e in a.eff:
        read |= e.reads()
        (assigned if e.op == ASSIGN else increased).add(e.target)
    return InterferenceSets(frozenset(read), frozenset(assigned), frozenset(increased))


def interferes(a: InstantAction, b: InstantAction) -> bool:
    """Read/write or write/write conflict between two happenings.

    An assignment also conflicts with an increase of the same fluent: the
    two do not commute (``x := 5`` then ``x += 1`` differs from the reverse
    order) and the lock encoding forbids the pair as well.  Two increases
    never conflict.
    """
    sa, sb = interference_sets(a), interference_sets(b)
    return bool(
        sa.read & sb.write
        or sb.read & sa.write
        or sa.assign & sb.write
        or sb.assign & sa.write
    )


@dataclass(frozen=True)
class DurativeAction:
    name: str
    lb: Fraction
    ub: Fraction
    start: InstantAction
    end: InstantAction
    overall: Formula = TRUE

    def __post_init__(self):
        lb, ub = to_fraction(self.lb), to_fraction(self.ub)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        if not 0 < lb <= ub:
            raise ModelError(f"{self.name}: need 0 < lb <= ub, got [{lb}, {ub}]")

    @property
    def fixed(self) -> bool:
        return self.lb == self.ub


@dataclass(frozen=True)
class Process:
    name: str
    pre: Formula
    rates: tuple[tuple[str, NumExpr], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "rates", tuple((f, num(r)) for f, r in self.rates)
        )


# --------------------------------------------------------------------------
# States


class State(Mapping[str, Value]):
    """Immutable, hashable total assignment of fluents to values."""

    __slots__ = ("_values", "_hash")

    def __init__(self, values: Mapping[str, Value] | Iterable[tuple[str, Value]] = ()):
        items = dict(values)
        for k, v in items.items():
            if not isinstance(v, bool):
                items[k] = to_fraction(v)
        self._values = items
        self._hash = None

    def __getitem__(self, name: str) -> Value:
        return self._values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._values.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, State):
            return self._values == other._values
        return NotImplemented

    def updated(self, changes: Mapping[str, Value]) -> "State":
        if not changes:
            return self
        merged = dict(self._values)
        merged.update(changes)
        s = State.__new__(State)
        s._values = merged
        s._hash = None
        return s

    def restrict(self, names: Iterable[str]) -> "State":
        return State({n: self._values[n] for n in names})

    def __repr__(self):
        body = ", ".join(f"{k}={_fmt_value(v)}" for k, v in sorted(self._values.items()))
        return f"State({body})"


def _fmt_value(v: Value) -> str:
    if isinstance(v, bool):
        return "T" if v else "F"
    return format_number(v)


def format_number(q: Fraction) -> str:
    """Integer, terminating decimal, or ``p/q`` text for an exact rational."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    scaled = abs(q) * 10**places
    whole, frac = divmod(int(scaled), 10**places)
    sign = "-" if q < 0 else ""
    return f"{sign}{whole}.{str(frac).rjust(places, '0')}"


def parse_number(text: str) -> Fraction:
    """Parse ``3``, ``-1.25`` or ``3/2`` exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational number: {text!r}") from None


# --------------------------------------------------------------------------
# Evaluation and application


def evaluate(state: Mapping[str, Value], expr) -> Value:
    """Value of a formula or numeric expression in ``state``."""
    if isinstance(expr, NumExpr):
        return _eval_num(state, expr)
    return _eval_formula(state, expr)


def _eval_num(s, e: NumExpr) -> Fraction:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, FluentRef):
        v = s[e.name]
        if isinstance(v, bool):
            raise EvaluationError(f"boolean fluent {e.name} used as a number", e)
        return v
    if isinstance(e, Neg):
        return -_eval_num(s, e.arg)
    left = _eval_num(s, e.left)
    right = _eval_num(s, e.right)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if right == 0:
        raise EvaluationError(f"division by zero in {e}", e)
    return left / right


def _eval_formula(s, f: Formula) -> bool:
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Atom):
        v = s[f.name]
        if not isinstance(v, bool):
            raise EvaluationError(f"numeric fluent {f.name} used as a formula", f)
        return v
    if isinstance(f, Compare):
        left = _eval_num(s, f.left)
        right = _eval_num(s, f.right)
        return {
            "<": left < right,
            "<=": left <= right,
            "=": left == right,
            ">=": left >= right,
            ">": left > right,
        }[f.op]
    if isinstance(f, And):
        return all(_eval_formula(s, a) for a in f.args)
    if isinstance(f, Or):
        return any(_eval_formula(s, a) for a in f.args)
    if isinstance(f, Not):
        return not _eval_formula(s, f.arg)
    raise TypeError(f"not a formula: {f!r}")


def holds(state, f: Formula) -> bool:
    return _eval_formula(state, f)


def first_false_conjunct(state, f: Formula) -> Formula | None:
    for c in conjuncts(f):
        if not _eval_formula(state, c):
            return c
    return None


def apply(state: State, action: InstantAction) -> State:
    """Apply the effects of ``action``; every right-hand side reads ``state``."""
    changes: dict[str, Value] = {}
    for e in action.eff:
        if e.is_boolean:
            changes[e.target] = e.value
        elif e.op == ASSIGN:
            changes[e.target] = _eval_num(state, e.value)
        else:
            base = changes.get(e.target, state[e.target])
            changes[e.target] = base + _eval_num(state, e.value)
    return state.updated(changes)


# --------------------------------------------------------------------------
# Problems


@dataclass(frozen=True)
class Fluent:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in (BOOL, NUM):
            raise ModelError(f"fluent {self.name}: unknown kind {self.kind!r}")

    def default(self) -> Value:
        return False if self.kind == BOOL else Fraction(0)


def _fluent_table(fluents: Iterable[Fluent]) -> dict[str, str]:
    table: dict[str, str] = {}
    for f in fluents:
        if f.name in table:
            raise ModelError(f"duplicate fluent {f.name}")
        table[f.name] = f.kind
    return table


class _Checker:
    def __init__(self, kinds: Mapping[str, str]):
        self.kinds = kinds

    def num(self, e: NumExpr, where: str):
        for n in e.fluents():
            if self.kinds.get(n) != NUM:
                raise ModelError(f"{where}: {n} is not a declared numeric fluent")

    def formula(self, f: Formula, where: str):
        if isinstance(f, Atom):
            if self.kinds.get(f.name) != BOOL:
                raise ModelError(f"{where}: {f.name} is not a declared boolean fluent")
        elif isinstance(f, Compare):
            self.num(f.left, where)
            self.num(f.right, where)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                self.formula(a, where)
        elif isinstance(f, Not):
            self.formula(f.arg, where)

    def effects(self, effects: Iterable[Effect], where: str):
        for e in effects:
            kind = self.kinds.get(e.target)
            if kind is None:
                raise ModelError(f"{where}: effect on undeclared fluent {e.target}")
            if e.is_boolean != (kind == BOOL):
                raise ModelError(f"{where}: effect {e} does not match kind of {e.target}")
            if not e.is_boolean:
                self.num(e.value, where)

    def action(self, a: InstantAction):
        self.formula(a.pre, a.name)
        self.effects(a.eff, a.name)

    def state(self, s: Mapping[str, Value], where: str):
        missing = set(self.kinds) - set(s)
        extra = set(s) - set(self.kinds)
        if missing or extra:
            raise ModelError(
                f"{where} must assign every fluent exactly once "
                f"(missing {sorted(missing)}, unknown {sorted(extra)})"
            )
        for n, v in s.items():
            if isinstance(v, bool) != (self.kinds[n] == BOOL):
                raise ModelError(f"{where}: value of {n} has the wrong kind")


def _unique_names(items, what: str):
    seen = set()
    for it in items:
        if it.name in seen:
            raise ModelError(f"duplicate {what} {it.name}")
        seen.add(it.name)


@dataclass(frozen=True)
class TemporalProblem:
    fluents: tuple[Fluent, ...]
    init: State
    instant_actions: tuple[InstantAction, ...]
    durative_actions: tuple[DurativeAction, ...]
    goal: Formula
    name: str = "problem"

    def __post_init__(self):
        object.__setattr__(self, "fluents", tuple(self.fluents))
        object.__setattr__(self, "instant_actions", tuple(self.instant_actions))
        object.__setattr__(self, "durative_actions", tuple(self.durative_actions))
        if not isinstance(self.init, State):
            object.__setattr__(self, "init", State(self.init))
        chk = _Checker(_fluent_table(self.fluents))
        chk.state(self.init, "initial state")
        _unique_names(list(self.instant_actions) + list(self.durative_actions), "action")
        for a in self.instant_actions:
            chk.action(a)
        for d in self.durative_actions:
            chk.action(d.start)
            chk.action(d.end)
            chk.formula(d.overall, d.name)
        chk.formula(self.goal, "goal")

    @property
    def kinds(self) -> dict[str, str]:
        return {f.name: f.kind for f in self.fluents}

    @property
    def boolean_fluents(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fluents if f.kind == BOOL)

    @property
    def numeric_fluents(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fluents if f.kind == NUM)

    def action(self, name: str):
        for a in self.instant_actions:
            if a.name == name:
                return a
        for a in self.durative_actions:
            if a.name == name:
                return a
        raise KeyError(name)

    @property
    def fixed_actions(self) -> tuple[DurativeAction, ...]:
        return tuple(a for a in self.durative_actions if a.fixed)

    @property
    def variable_actions(self) -> tuple[DurativeAction, ...]:
        return tuple(a for a in self.durative_actions if not a.fixed)


@dataclass(frozen=True)
class PlusProblem:
    """Target problem.  ``events`` is ordered: event completion fires the
    first applicable event in this order."""

    fluents: tuple[Fluent, ...]
    init: State
    goal: Formula
    actions: tuple[InstantAction, ...] = ()
    events: tuple[Event, ...] = ()
    processes: tuple[Process, ...] = ()
    name: str = "problem"

    def __post_init__(self):
        for attr in ("fluents", "actions", "events", "processes"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if not isinstance(self.init, State):
            object.__setattr__(self, "init", State(self.init))
        kinds = _fluent_table(self.fluents)
        chk = _Checker(kinds)
        chk.state(self.init, "initial state")
        _unique_names(self.actions, "action")
        _unique_names(self.events, "event")
        _unique_names(self.processes, "process")
        for a in self.actions + self.events:
            chk.action(a)
        for p in self.processes:
            chk.formula(p.pre, p.name)
            for f, rate in p.rates:
                if kinds.get(f) != NUM:
                    raise ModelError(f"{p.name}: rate on non-numeric fluent {f}")
                chk.num(rate, p.name)
        chk.formula(self.goal, "goal")

    @property
    def kinds(self) -> dict[str, str]:
        return {f.name: f.kind for f in self.fluents}

    def action(self, name: str) -> InstantAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)


# --------------------------------------------------------------------------
# Plans


@dataclass(frozen=True, order=True)
class PlanEntry:
    time: Fraction
    action: str
    duration: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "time", to_fraction(self.time))
        object.__setattr__(self, "duration", to_fraction(self.duration))


@dataclass(frozen=True)
class TemporalPlan:
    entries: frozenset[PlanEntry] = field(default_factory=frozenset)

    def __post_init__(self):
        entries = frozenset(
            e if isinstance(e, PlanEntry) else PlanEntry(*e) for e in self.entries
        )
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries))


@dataclass(frozen=True)
class PlusPlan:
    steps: tuple[tuple[Fraction, str], ...] = ()
    makespan: Fraction = Fraction(0)

    def __post_init__(self):
        steps = tuple((to_fraction(t), a) for t, a in self.steps)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "makespan", to_fraction(self.makespan))

    def __len__(self):
        return len(self.steps)
