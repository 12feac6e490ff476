"""Random tiny ground problems for property testing."""

from __future__ import annotations

import random
from fractions import Fraction

from .model import (
    BOOL,
    NUM,
    TRUE,
    Atom,
    BinOp,
    Compare,
    Const,
    DurativeAction,
    Effect,
    Fluent,
    FluentRef,
    InstantAction,
    State,
    TemporalProblem,
    conj,
    neg,
    ASSIGN,
    INCREASE,
)


def _literal(rng: random.Random, bools):
    f = rng.choice(bools)
    return Atom(f) if rng.random() < 0.6 else neg(Atom(f))


def _comparison(rng: random.Random, nums):
    f = rng.choice(nums)
    op = rng.choice(["<", "<=", "=", ">=", ">"])
    return Compare(op, FluentRef(f), Const(rng.randint(0, 3)))


def random_formula(rng: random.Random, bools, nums, max_parts=2):
    parts = []
    for _ in range(rng.randint(0, max_parts)):
        if nums and (not bools or rng.random() < 0.3):
            parts.append(_comparison(rng, nums))
        elif bools:
            parts.append(_literal(rng, bools))
    return conj(*parts)


def random_effects(rng: random.Random, bools, nums, max_effects=2) -> tuple[Effect, ...]:
    out: dict[str, Effect] = {}
    for _ in range(rng.randint(1, max_effects)):
        if nums and (not bools or rng.random() < 0.35):
            f = rng.choice(nums)
            if f in out:
                continue
            if rng.random() < 0.7:
                out[f] = Effect(f, INCREASE, Const(rng.choice([-1, 1, 1, 2])))
            elif len(nums) > 1 and rng.random() < 0.5:
                g = rng.choice([n for n in nums if n != f])
                out[f] = Effect(f, ASSIGN, BinOp("+", FluentRef(g), Const(1)))
            else:
                out[f] = Effect(f, ASSIGN, Const(rng.randint(0, 3)))
        elif bools:
            f = rng.choice(bools)
            if f not in out:
                out[f] = Effect(f, ASSIGN, rng.random() < 0.6)
    return tuple(out.values())


def random_problem(
    rng: random.Random,
    max_bool: int = 6,
    max_num: int = 4,
    max_instant: int = 3,
    max_durative: int = 5,
    durations=(1, 2, 3),
    min_bool: int = 1,
) -> TemporalProblem:
    """A well-formed random problem; goals are built from literals some
    effect can establish, so a fair share is solvable."""
    nb = rng.randint(min_bool, max_bool)
    nx = rng.randint(0, max_num)
    bools = [f"p{i}" for i in range(nb)]
    nums = [f"x{i}" for i in range(nx)]
    init = {b: rng.random() < 0.4 for b in bools}
    init.update({x: Fraction(rng.randint(0, 2)) for x in nums})

    instants = []
    for i in range(rng.randint(0, max_instant)):
        instants.append(
            InstantAction(
                f"i{i}",
                random_formula(rng, bools, nums, 1),
                random_effects(rng, bools, nums),
            )
        )
    duratives = []
    for i in range(rng.randint(0 if instants or not max_durative else 1, max_durative)):
        lb = Fraction(rng.choice(durations))
        ub = lb if rng.random() < 0.5 else lb + rng.choice(durations)
        start = InstantAction(
            f"d{i} [start]", random_formula(rng, bools, nums, 1), random_effects(rng, bools, nums)
        )
        end = InstantAction(
            f"d{i} [end]", random_formula(rng, bools, nums, 1), random_effects(rng, bools, nums, 1)
        )
        overall = random_formula(rng, bools, nums, 1) if rng.random() < 0.4 else TRUE
        duratives.append(DurativeAction(f"d{i}", lb, ub, start, end, overall))

    achievable = []
    for a in instants + [d.start for d in duratives] + [d.end for d in duratives]:
        for e in a.eff:
            if e.is_boolean:
                achievable.append(Atom(e.target) if e.value else neg(Atom(e.target)))
    goal_parts = rng.sample(achievable, min(len(achievable), rng.randint(1, 2)))
    goal = conj(*goal_parts) if goal_parts else TRUE
    fluents = [Fluent(b, BOOL) for b in bools] + [Fluent(x, NUM) for x in nums]
    return TemporalProblem(tuple(fluents), State(init), tuple(instants), tuple(duratives), goal)


def random_action_pair(rng: random.Random, n_bool: int = 3, n_num: int = 2):
    """Problem with two instantaneous actions whose preconditions hold in
    the initial state; the goal is trivially true."""
    bools = [f"p{i}" for i in range(n_bool)]
    nums = [f"x{i}" for i in range(n_num)]
    init = {b: rng.random() < 0.5 for b in bools}
    init.update({x: Fraction(rng.randint(1, 3)) for x in nums})
    state = State(init)

    def pre():
        parts = []
        for _ in range(rng.randint(0, 2)):
            if rng.random() < 0.5:
                f = rng.choice(bools)
                parts.append(Atom(f) if state[f] else neg(Atom(f)))
            else:
                f = rng.choice(nums)
                parts.append(Compare(">=", FluentRef(f), Const(state[f])))
        return conj(*parts)

    acts = tuple(
        InstantAction(name, pre(), random_effects(rng, bools, nums, 2)) for name in ("a", "b")
    )
    fluents = [Fluent(b, BOOL) for b in bools] + [Fluent(x, NUM) for x in nums]
    return TemporalProblem(tuple(fluents), state, acts, (), TRUE)
