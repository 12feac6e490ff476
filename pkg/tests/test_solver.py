from fractions import Fraction
from pathlib import Path

import pytest

from cases import hand_cases, problem
from tempo2plus.compiler import compile_problem
from tempo2plus.model import FALSE, TRUE, PlusPlan
from tempo2plus.pddl import load_plus
from tempo2plus.plus import validate_plus
from tempo2plus.solver import BUDGET, EXHAUSTED, SOLVED, solve

FIX = Path(__file__).parent / "fixtures"


def match():
    case = hand_cases()[0]
    return compile_problem(case.problem).result


def test_finds_match_plan():
    result = solve(match(), 1, horizon=3, max_actions_per_step=1)
    assert result.status == SOLVED
    assert result.plan == PlusPlan(((Fraction(0), "start-match"),), Fraction(3))


def test_goal_in_initial_state():
    result = solve(compile_problem(problem("p", goal=TRUE)).result, 1, horizon=0)
    assert result.solved
    assert result.plan == PlusPlan((), Fraction(0))


def test_unsatisfiable_goal_exhausts():
    result = solve(compile_problem(problem("p", goal=FALSE)).result, 1, horizon=5)
    assert result.status == EXHAUSTED


def test_horizon_too_short():
    assert solve(match(), 1, horizon=2).status == EXHAUSTED


def test_node_budget():
    plus = compile_problem(hand_cases()[1].problem).result
    result = solve(plus, 1, horizon=15, node_budget=5)
    assert result.status == BUDGET
    assert result.stats.expanded > 5


def test_invalid_arguments():
    with pytest.raises(ValueError):
        solve(match(), 0)
    with pytest.raises(ValueError):
        solve(match(), 1, horizon=-1)


def test_hand_written_plus_problem():
    tank = load_plus(
        (FIX / "counter_plus_domain.pddl").read_text(), (FIX / "counter_plus_problem.pddl").read_text()
    )
    result = solve(tank, 1, horizon=5)
    assert result.solved
    assert validate_plus(tank, result.plan, 1).valid
    # shortest: open at 0, close at 2 (level 4), goal at 3
    assert result.plan.makespan == 3


@pytest.mark.parametrize("case", hand_cases(), ids=lambda c: c.name)
def test_bounded_completeness_on_hand_cases(case):
    # each case has a known plan inside these bounds, so the search must not exhaust
    plus = compile_problem(case.problem).result
    result = solve(plus, case.delta, case.horizon)
    assert result.solved
    assert validate_plus(plus, result.plan, case.delta).valid


def test_stats_json():
    result = solve(match(), 1, horizon=3)
    stats = result.stats.to_json()
    assert set(stats) == {"nodes_expanded", "nodes_generated", "duplicates", "dead_ends", "wall_time"}
