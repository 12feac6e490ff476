"""Temporal problem -> PDDL+ problem.

Each durative action becomes a start action, a clock process and either an
end action (variable duration) or an end event (fixed duration).  Overall
conditions and duration upper bounds are watched by events that falsify
``ok``; per-fluent lock predicates, reset by a single event once time has
advanced, forbid interfering happenings at the same time point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    BOOL,
    NUM,
    TRUE,
    Atom,
    Compare,
    Const,
    DurativeAction,
    Effect,
    Event,
    Fluent,
    FluentRef,
    Formula,
    InstantAction,
    PlusProblem,
    Process,
    State,
    TemporalProblem,
    assign,
    conj,
    increase,
    interference_sets,
    neg,
    set_false,
    set_true,
)

# roles of compiled elements
INSTANT = "instant"
START = "start"
END_VAR = "end-var"
END_FIX_EVENT = "end-fix-event"
OVERALL_EVENT = "overall-event"
EXPIRE_EVENT = "expire-event"
LOCK_RESET_EVENT = "lock-reset-event"
CLOCK_PROCESS = "clock-process"
GC_PROCESS = "gc-process"


class CompilationError(ValueError):
    pass


@dataclass(frozen=True)
class Origin:
    """Where a compiled element comes from; ``source`` is ``None`` for the
    global lock machinery."""

    source: str | None
    role: str


@dataclass
class CompilationArtifacts:
    result: PlusProblem
    source: TemporalProblem
    names: dict[str, Origin] = field(default_factory=dict)
    fluents: dict[str, tuple[str, str | None]] = field(default_factory=dict)
    ok: str = "ok"
    oc: str = "oc"
    gc: str = "gc"
    running: dict[str, str] = field(default_factory=dict)
    clock: dict[str, str] = field(default_factory=dict)
    rlock: dict[str, str] = field(default_factory=dict)
    alock: dict[str, str] = field(default_factory=dict)
    ilock: dict[str, str] = field(default_factory=dict)

    def compiled_name(self, source: str, role: str) -> str:
        for name, origin in self.names.items():
            if origin.source == source and origin.role == role:
                return name
        raise KeyError((source, role))

    def origin(self, name: str) -> Origin:
        return self.names[name]

    def to_json(self) -> dict:
        return {
            "elements": {
                n: {"source": o.source, "role": o.role} for n, o in self.names.items()
            },
            "fluents": {
                n: {"role": role, "source": src} for n, (role, src) in self.fluents.items()
            },
        }


class _Names:
    def __init__(self, taken):
        self.taken = set(taken)

    def fresh(self, base: str) -> str:
        name, k = base, 1
        while name in self.taken:
            k += 1
            name = f"{base}_{k}"
        self.taken.add(name)
        return name


@dataclass(frozen=True)
class _Locks:
    r: dict[str, str]
    a: dict[str, str]
    i: dict[str, str]

    def precondition(self, action: InstantAction) -> Formula:
        sets = interference_sets(action)
        parts: list[Formula] = []
        for f in sorted(sets.read):
            parts += [Atom(self.a[f]), Atom(self.i[f])]
        for f in sorted(sets.assign):
            parts += [Atom(self.r[f]), Atom(self.i[f]), Atom(self.a[f])]
        for f in sorted(sets.increase):
            parts += [Atom(self.r[f]), Atom(self.a[f])]
        return conj(*parts)

    def effects(self, action: InstantAction) -> tuple[Effect, ...]:
        sets = interference_sets(action)
        out = [set_false(self.a[f]) for f in sorted(sets.assign)]
        out += [set_false(self.i[f]) for f in sorted(sets.increase)]
        out += [set_false(self.r[f]) for f in sorted(sets.read)]
        return tuple(out)


def _identity_locks(action: InstantAction) -> _Locks:
    names = interference_sets(action)
    fs = names.read | names.write
    return _Locks(
        {f: f"rlock-{f}" for f in fs},
        {f: f"alock-{f}" for f in fs},
        {f: f"ilock-{f}" for f in fs},
    )


def lock_precondition(action: InstantAction, locks: _Locks | None = None) -> Formula:
    """Conjunction of the lock predicates ``action`` needs.

    Read fluents need their assign and increase locks, assigned fluents
    need all three, increased fluents need the read and assign locks.
    """
    return (locks or _identity_locks(action)).precondition(action)


def lock_effects(action: InstantAction, locks: _Locks | None = None) -> tuple[Effect, ...]:
    return (locks or _identity_locks(action)).effects(action)


def compile_problem(problem: TemporalProblem, expire_events: bool = True) -> CompilationArtifacts:
    """Compile ``problem`` into an equivalent PDDL+ problem.

    With ``expire_events=False`` the events that abort a variable-duration
    action overrunning its upper bound are left out; they only prune.
    """
    source_fluents = [f.name for f in problem.fluents]
    fresh = _Names(source_fluents)
    art_fluents: dict[str, tuple[str, str | None]] = {}

    def introduce(base, role, src=None):
        name = fresh.fresh(base)
        art_fluents[name] = (role, src)
        return name

    ok = introduce("ok", "ok")
    oc = introduce("oc", "oc")
    gc = introduce("gc", "gc")
    running, clock = {}, {}
    for a in problem.durative_actions:
        running[a.name] = introduce(f"running-{a.name}", "running", a.name)
        clock[a.name] = introduce(f"clock-{a.name}", "clock", a.name)
    rl, al, il = {}, {}, {}
    for f in source_fluents:
        rl[f] = introduce(f"rlock-{f}", "rlock", f)
        al[f] = introduce(f"alock-{f}", "alock", f)
        il[f] = introduce(f"ilock-{f}", "ilock", f)
    locks = _Locks(rl, al, il)

    # fluents: F, ok, running, locks, then X, oc, gc, clocks
    fl = [f for f in problem.fluents if f.kind == BOOL]
    fl.append(Fluent(ok, BOOL))
    fl += [Fluent(running[a.name], BOOL) for a in problem.durative_actions]
    for f in source_fluents:
        fl += [Fluent(rl[f], BOOL), Fluent(al[f], BOOL), Fluent(il[f], BOOL)]
    fl += [f for f in problem.fluents if f.kind == NUM]
    fl += [Fluent(oc, NUM), Fluent(gc, NUM)]
    fl += [Fluent(clock[a.name], NUM) for a in problem.durative_actions]

    init = dict(problem.init)
    init.update({ok: True, oc: Fraction(0), gc: Fraction(0)})
    for a in problem.durative_actions:
        init[running[a.name]] = False
        init[clock[a.name]] = Fraction(0)
    for f in source_fluents:
        init[rl[f]] = init[al[f]] = init[il[f]] = True

    ok_atom = Atom(ok)
    goal = conj(problem.goal, ok_atom, Compare("=", FluentRef(oc), Const(0)))

    op_names = _Names(())
    names: dict[str, Origin] = {}

    def element(base, source, role):
        n = op_names.fresh(base)
        names[n] = Origin(source, role)
        return n

    actions: list[InstantAction] = []
    for a in problem.instant_actions:
        actions.append(
            InstantAction(
                element(a.name, a.name, INSTANT),
                conj(a.pre, ok_atom, locks.precondition(a)),
                a.eff + locks.effects(a),
            )
        )
    for a in problem.durative_actions:
        s = a.start
        actions.append(
            InstantAction(
                element(f"start-{a.name}", a.name, START),
                conj(s.pre, ok_atom, locks.precondition(s), neg(Atom(running[a.name]))),
                s.eff
                + locks.effects(s)
                + (set_true(running[a.name]), assign(clock[a.name], 0), increase(oc, 1)),
            )
        )
    for a in problem.variable_actions:
        e = a.end
        c = FluentRef(clock[a.name])
        actions.append(
            InstantAction(
                element(f"end-{a.name}", a.name, END_VAR),
                conj(
                    e.pre,
                    ok_atom,
                    Atom(running[a.name]),
                    Compare("<=", Const(a.lb), c),
                    Compare("<=", c, Const(a.ub)),
                    locks.precondition(e),
                ),
                e.eff + locks.effects(e) + (set_false(running[a.name]), increase(oc, -1)),
            )
        )

    processes = [
        Process(
            element(f"p-{a.name}", a.name, CLOCK_PROCESS),
            conj(ok_atom, Atom(running[a.name])),
            ((clock[a.name], Const(1)),),
        )
        for a in problem.durative_actions
    ]
    processes.append(Process(element("p-lightning", None, GC_PROCESS), ok_atom, ((gc, Const(1)),)))

    # event order is the firing priority: lock reset, expiry, overall, fixed ends
    gc_ref = FluentRef(gc)
    reset = [set_true(x) for f in source_fluents for x in (rl[f], al[f], il[f])]
    events = [
        Event(
            element("e-lightning", None, LOCK_RESET_EVENT),
            conj(ok_atom, Compare(">", gc_ref, Const(0))),
            (assign(gc, 0),) + tuple(reset),
        )
    ]
    if expire_events:
        for a in sorted(problem.variable_actions, key=lambda a: a.name):
            events.append(
                Event(
                    element(f"expire-{a.name}", a.name, EXPIRE_EVENT),
                    conj(
                        ok_atom,
                        Atom(running[a.name]),
                        Compare(">", FluentRef(clock[a.name]), Const(a.ub)),
                    ),
                    (set_false(ok),),
                )
            )
    for a in sorted(problem.durative_actions, key=lambda a: a.name):
        events.append(
            Event(
                element(f"overall-{a.name}", a.name, OVERALL_EVENT),
                conj(ok_atom, Atom(running[a.name]), neg(a.overall)),
                (set_false(ok),),
            )
        )
    for a in sorted(problem.fixed_actions, key=lambda a: a.name):
        e = a.end
        events.append(
            Event(
                element(f"end-{a.name}", a.name, END_FIX_EVENT),
                conj(
                    e.pre,
                    ok_atom,
                    Atom(running[a.name]),
                    Compare("=", FluentRef(clock[a.name]), Const(a.lb)),
                    locks.precondition(e),
                    Compare("=", gc_ref, Const(0)),
                ),
                e.eff + locks.effects(e) + (set_false(running[a.name]), increase(oc, -1)),
            )
        )

    result = PlusProblem(
        tuple(fl),
        State(init),
        goal,
        tuple(actions),
        tuple(events),
        tuple(processes),
        name=problem.name,
    )
    return CompilationArtifacts(
        result=result,
        source=problem,
        names=names,
        fluents=art_fluents,
        ok=ok,
        oc=oc,
        gc=gc,
        running=running,
        clock=clock,
        rlock=rl,
        alock=al,
        ilock=il,
    )


def expected_sizes(problem: TemporalProblem) -> dict[str, int]:
    """Element counts the compilation must produce (with expire events)."""
    nf = len(problem.boolean_fluents)
    nx = len(problem.numeric_fluents)
    nd = len(problem.durative_actions)
    nvar = len(problem.variable_actions)
    nfix = len(problem.fixed_actions)
    return {
        "bool_fluents": nf + 1 + nd + 3 * (nf + nx),
        "num_fluents": nx + 2 + nd,
        "actions": len(problem.instant_actions) + nd + nvar,
        "events": nfix + nd + nvar + 1,
        "processes": nd + 1,
    }


def actual_sizes(p: PlusProblem) -> dict[str, int]:
    return {
        "bool_fluents": sum(1 for f in p.fluents if f.kind == BOOL),
        "num_fluents": sum(1 for f in p.fluents if f.kind == NUM),
        "actions": len(p.actions),
        "events": len(p.events),
        "processes": len(p.processes),
    }
