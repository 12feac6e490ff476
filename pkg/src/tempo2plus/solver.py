"""Bounded breadth-first search over the discrete PDDL+ semantics.

Meant for tiny instances: it is the in-repo oracle that produces PDDL+
plans for round-trip checks.  Plans are found in order of (number of
steps, number of actions).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .model import EvaluationError, PlusPlan, PlusProblem, State, apply, holds, to_fraction
from .plus import DivergenceError, event_completion, integrate_processes, validate_plus

SOLVED = "solved"
EXHAUSTED = "exhausted"
BUDGET = "budget"


@dataclass
class SolveStats:
    expanded: int = 0
    generated: int = 0
    duplicates: int = 0
    dead_ends: int = 0
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {
            "nodes_expanded": self.expanded,
            "nodes_generated": self.generated,
            "duplicates": self.duplicates,
            "dead_ends": self.dead_ends,
            "wall_time": round(self.wall_time, 6),
        }


@dataclass
class SolveResult:
    status: str
    plan: PlusPlan | None = None
    delta: Fraction = Fraction(1)
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


class _Budget(Exception):
    pass


@dataclass(frozen=True)
class _Head:
    """A state at the start of a step, before event completion."""

    state: State
    plan: tuple[tuple[int, str], ...]  # (step, action)


def _step_successors(head: _Head, j: int, problem: PlusProblem, delta, max_actions, stats, budget):
    """Every distinct end-of-step state reachable from ``head`` with at most
    ``max_actions`` distinct actions, keyed by state, keeping the shortest
    action sequence."""
    try:
        start, _ = event_completion(head.state, problem.events)
    except (DivergenceError, EvaluationError):
        stats.dead_ends += 1
        return {}
    results: dict[State, tuple[str, ...]] = {}
    layer = {(start, frozenset()): ()}
    seen = set(layer)
    while layer:
        nxt = {}
        for (state, used), seq in layer.items():
            if state not in results:
                results[state] = seq
            if len(seq) >= max_actions:
                continue
            stats.expanded += 1
            if budget is not None and stats.expanded > budget:
                raise _Budget
            for a in problem.actions:
                if a.name in used:
                    continue
                try:
                    if not holds(state, a.pre):
                        continue
                    after, _ = event_completion(apply(state, a), problem.events)
                except (DivergenceError, EvaluationError):
                    stats.dead_ends += 1
                    continue
                key = (after, used | {a.name})
                stats.generated += 1
                if key in seen:
                    stats.duplicates += 1
                    continue
                seen.add(key)
                nxt[key] = seq + (a.name,)
        layer = nxt
    return results


def solve(
    problem: PlusProblem,
    delta=1,
    horizon: int = 10,
    max_actions_per_step: int | None = None,
    node_budget: int | None = None,
) -> SolveResult:
    """Find a plan with makespan at most ``horizon * delta``.

    ``EXHAUSTED`` means no plan exists within the horizon using at most
    ``max_actions_per_step`` distinct actions per step (default: all of
    them).  ``BUDGET`` means the node budget ran out first.
    """
    delta = to_fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if max_actions_per_step is None:
        max_actions_per_step = len(problem.actions)
    stats = SolveStats()
    t0 = time.perf_counter()

    def done(status, plan=None):
        stats.wall_time = time.perf_counter() - t0
        return SolveResult(status, plan, delta, stats)

    layer = {problem.init: _Head(problem.init, ())}
    visited = {problem.init}
    try:
        for j in range(horizon + 1):
            goals = [h for h in layer.values() if _goal(problem, h.state)]
            if goals:
                best = min(goals, key=lambda h: (len(h.plan), h.plan))
                plan = PlusPlan(tuple((delta * s, a) for s, a in best.plan), delta * j)
                report = validate_plus(problem, plan, delta)
                if not report.valid:
                    raise AssertionError(f"solver produced an invalid plan: {report.summary()}")
                return done(SOLVED, plan)
            if j == horizon:
                break
            nxt: dict[State, _Head] = {}
            for head in sorted(layer.values(), key=lambda h: (len(h.plan), h.plan)):
                ends = _step_successors(
                    head, j, problem, delta, max_actions_per_step, stats, node_budget
                )
                for end, seq in ends.items():
                    try:
                        new = integrate_processes(end, problem.processes, delta)
                    except EvaluationError:
                        stats.dead_ends += 1
                        continue
                    plan = head.plan + tuple((j, a) for a in seq)
                    if new in visited and new not in nxt:
                        stats.duplicates += 1
                        continue
                    old = nxt.get(new)
                    if old is None or (len(plan), plan) < (len(old.plan), old.plan):
                        nxt[new] = _Head(new, plan)
            visited.update(nxt)
            layer = nxt
            if not layer:
                break
    except _Budget:
        return done(BUDGET)
    return done(EXHAUSTED)


def _goal(problem, state) -> bool:
    try:
        return holds(state, problem.goal)
    except EvaluationError:
        return False
