"""Exhaustive grounding of lifted domains over typed objects."""

from __future__ import annotations

import itertools
from fractions import Fraction

from ..model import (
    BOOL,
    FALSE,
    NUM,
    TRUE,
    And,
    Atom,
    Compare,
    DurativeAction,
    Effect,
    Event,
    Fluent,
    Formula,
    InstantAction,
    ModelError,
    Not,
    Or,
    PlusProblem,
    Process,
    State,
    TemporalProblem,
    Truth,
    conj,
    disj,
    neg,
)
from .names import rename_effect, rename_num
from .parser import LiftedDomain, LiftedProblem, Schema


class GroundingError(ValueError):
    pass


class _Grounder:
    def __init__(self, domain: LiftedDomain, problem: LiftedProblem):
        self.domain = domain
        self.problem = problem
        self.objects = dict(domain.constants)
        self.objects.update(problem.objects)
        self.fluents = self._ground_fluents()
        self.kinds = {f.name: f.kind for f in self.fluents}

    def objects_of(self, t: str) -> list[str]:
        return sorted(o for o, ot in self.objects.items() if self.domain.is_subtype(ot, t))

    def _instances(self, symbol: str, sig: list[str]) -> list[str]:
        pools = [self.objects_of(t) for t in sig]
        return [" ".join((symbol,) + combo) for combo in itertools.product(*pools)]

    def _ground_fluents(self) -> list[Fluent]:
        out = []
        for p, sig in self.domain.predicates.items():
            out.extend(Fluent(n, BOOL) for n in self._instances(p, sig))
        for f, sig in self.domain.functions.items():
            out.extend(Fluent(n, NUM) for n in self._instances(f, sig))
        return out

    def bindings(self, schema: Schema):
        names = [p for p, _ in schema.params]
        pools = [self.objects_of(t) for _, t in schema.params]
        for combo in itertools.product(*pools):
            yield dict(zip(names, combo)), combo

    # -- substitution -----------------------------------------------------

    @staticmethod
    def _subst_name(name: str, binding: dict[str, str]) -> str:
        return " ".join(binding.get(p, p) for p in name.split(" "))

    def formula(self, f: Formula, binding) -> Formula:
        if isinstance(f, Atom):
            name = self._subst_name(f.name, binding)
            if name.startswith("= "):
                _, a, b = name.split(" ")
                return TRUE if a == b else FALSE
            return Atom(name)
        if isinstance(f, Truth):
            return f
        if isinstance(f, Compare):
            fn = lambda n: self._subst_name(n, binding)  # noqa: E731
            return Compare(f.op, rename_num(f.left, fn), rename_num(f.right, fn))
        if isinstance(f, And):
            return conj(*(self.formula(a, binding) for a in f.args))
        if isinstance(f, Or):
            return disj(*(self.formula(a, binding) for a in f.args))
        if isinstance(f, Not):
            return neg(self.formula(f.arg, binding))
        raise TypeError(f)

    def effects(self, effects: list[Effect], binding, owner: str) -> tuple[Effect, ...]:
        fn = lambda n: self._subst_name(n, binding)  # noqa: E731
        ground = []
        for e in effects:
            g = rename_effect(e, fn)
            if g not in ground:
                ground.append(g)
        # a ground atom both added and deleted keeps the add
        added = {e.target for e in ground if e.is_boolean and e.value is True}
        ground = [
            e for e in ground if not (e.is_boolean and e.value is False and e.target in added)
        ]
        try:
            InstantAction(owner, TRUE, tuple(ground))
        except ModelError as exc:
            raise GroundingError(str(exc)) from None
        return tuple(ground)

    # -- problem-level ----------------------------------------------------

    def init(self) -> State:
        values = {f.name: f.default() for f in self.fluents}
        for atom in self.problem.init_true:
            if atom not in values:
                raise GroundingError(f"init mentions unknown fluent {atom}")
            values[atom] = True
        for name, v in self.problem.init_values.items():
            if name not in values:
                raise GroundingError(f"init mentions unknown fluent {name}")
            values[name] = Fraction(v)
        return State(values)

    def goal(self) -> Formula:
        g = self.formula(self.problem.goal, {})
        unknown = sorted(n for n in g.fluents() if n not in self.kinds)
        if unknown:
            raise GroundingError(f"goal mentions unknown ground fluents {unknown}")
        return g

    def instant(self, schema: Schema, cls=InstantAction):
        out = []
        for binding, combo in self.bindings(schema):
            name = " ".join((schema.name,) + combo)
            out.append(
                cls(name, self.formula(schema.pre, binding), self.effects(schema.eff, binding, name))
            )
        return out

    def durative(self, schema: Schema) -> list[DurativeAction]:
        out = []
        for binding, combo in self.bindings(schema):
            name = " ".join((schema.name,) + combo)
            start = InstantAction(
                name + " [start]",
                self.formula(schema.start_pre, binding),
                self.effects(schema.start_eff, binding, name),
            )
            end = InstantAction(
                name + " [end]",
                self.formula(schema.end_pre, binding),
                self.effects(schema.end_eff, binding, name),
            )
            out.append(
                DurativeAction(
                    name, schema.lb, schema.ub, start, end, self.formula(schema.overall, binding)
                )
            )
        return out

    def process(self, schema: Schema) -> list[Process]:
        out = []
        for binding, combo in self.bindings(schema):
            fn = lambda n, b=binding: self._subst_name(n, b)  # noqa: E731
            out.append(
                Process(
                    " ".join((schema.name,) + combo),
                    self.formula(schema.pre, binding),
                    tuple((fn(f), rename_num(r, fn)) for f, r in schema.rates),
                )
            )
        return out


def _sorted_schemas(domain: LiftedDomain, kind: str) -> list[Schema]:
    return sorted(domain.of_kind(kind), key=lambda s: s.name)


def _by_name(items):
    return sorted(items, key=lambda a: a.name.split(" "))


def ground(domain: LiftedDomain, problem: LiftedProblem) -> TemporalProblem:
    """Ground a temporal domain; actions are ordered by schema name and arguments."""
    if domain.of_kind("process") or domain.of_kind("event"):
        raise GroundingError("domain has processes or events; use ground_plus")
    g = _Grounder(domain, problem)
    instants = []
    for s in _sorted_schemas(domain, "action"):
        instants.extend(g.instant(s))
    duratives = []
    for s in _sorted_schemas(domain, "durative"):
        duratives.extend(g.durative(s))
    try:
        return TemporalProblem(
            tuple(g.fluents),
            g.init(),
            tuple(_by_name(instants)),
            tuple(_by_name(duratives)),
            g.goal(),
            name=problem.name,
        )
    except ModelError as exc:
        raise GroundingError(str(exc)) from None


def ground_plus(domain: LiftedDomain, problem: LiftedProblem) -> PlusProblem:
    """Ground a PDDL+ domain.  Operators keep their declaration order, which
    for events is also their firing priority."""
    if domain.durative:
        raise GroundingError("domain has durative actions; compile it instead")
    g = _Grounder(domain, problem)
    actions = []
    for s in domain.of_kind("action"):
        actions.extend(g.instant(s))
    events = []
    for s in domain.of_kind("event"):
        events.extend(g.instant(s, Event))
    processes = []
    for s in domain.of_kind("process"):
        processes.extend(g.process(s))
    try:
        return PlusProblem(
            tuple(g.fluents),
            g.init(),
            g.goal(),
            tuple(actions),
            tuple(events),
            tuple(processes),
            name=problem.name,
        )
    except ModelError as exc:
        raise GroundingError(str(exc)) from None
