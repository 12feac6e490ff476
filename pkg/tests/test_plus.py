from fractions import Fraction
from pathlib import Path

import pytest

from cases import dur, inst, problem
from tempo2plus.compiler import compile_problem
from tempo2plus.model import (
    BOOL,
    NUM,
    TRUE,
    Atom,
    Compare,
    Const,
    Event,
    Fluent,
    FluentRef,
    PlusPlan,
    PlusProblem,
    Process,
    State,
    assign,
    increase,
    neg,
    set_false,
    set_true,
)
from tempo2plus.pddl import load_plus, load_temporal
from tempo2plus.plus import (
    ActionNotApplicable,
    DivergenceError,
    StepLog,
    completion_fixed_points,
    event_completion,
    integrate_processes,
    superdense_step,
    validate_plus,
)

F = Fraction
FIX = Path(__file__).parent / "fixtures"
gc = FluentRef("gc")


def compiled_match():
    temporal = load_temporal((FIX / "match_domain.pddl").read_text(), (FIX / "match_problem.pddl").read_text())
    return compile_problem(temporal)


def tank():
    return load_plus(
        (FIX / "counter_plus_domain.pddl").read_text(), (FIX / "counter_plus_problem.pddl").read_text()
    )


class TestEventCompletion:
    def test_single_reset(self):
        reset = Event("reset", Compare(">", gc, Const(0)), (assign("gc", 0),))
        out, fired = event_completion(State({"gc": F(1, 2)}), [reset])
        assert out["gc"] == 0 and [n for n, _ in fired] == ["reset"]

    def test_nothing_applicable(self):
        reset = Event("reset", Compare(">", gc, Const(0)), (assign("gc", 0),))
        s = State({"gc": F(0)})
        assert event_completion(s, [reset]) == (s, [])

    def test_chain(self):
        e1 = Event("e1", Atom("p"), (set_false("p"), set_true("q")))
        e2 = Event("e2", Atom("q"), (set_false("q"),))
        out, fired = event_completion(State({"p": True, "q": False}), [e1, e2])
        assert [n for n, _ in fired] == ["e1", "e2"]
        assert out == State({"p": False, "q": False})

    def test_divergence_detected(self):
        flip = Event("flip", Atom("p"), (set_false("p"),))
        flop = Event("flop", neg(Atom("p")), (set_true("p"),))
        with pytest.raises(DivergenceError):
            event_completion(State({"p": True}), [flip, flop])

    def test_firing_bound(self):
        bump = Event("bump", Compare("<", FluentRef("x"), Const(100)), (increase("x", 1),))
        with pytest.raises(DivergenceError):
            event_completion(State({"x": F(0)}), [bump], max_firings=10)

    def test_priority_is_declaration_order(self):
        e1 = Event("b-first", Atom("p"), (set_false("p"), set_true("q")))
        e2 = Event("a-second", Atom("p"), (set_false("p"), set_true("r")))
        out, _ = event_completion(State({"p": True, "q": False, "r": False}), [e1, e2])
        assert out["q"] and not out["r"]
        points = completion_fixed_points(State({"p": True, "q": False, "r": False}), [e1, e2])
        assert len(points) == 2


class TestSuperdense:
    def test_no_actions_is_completion(self):
        art = compiled_match()
        s = art.result.init.updated({"gc": F(1)})
        assert superdense_step(s, [], art.result.events) == event_completion(s, art.result.events)[0]

    def test_conflicting_locks_block_second_action(self):
        prob = problem(
            "",
            "x",
            instants=[inst("a", eff=[assign("x", 1)]), inst("b", eff=[assign("x", 2)])],
        )
        plus = compile_problem(prob).result
        a, b = plus.action("a"), plus.action("b")
        with pytest.raises(ActionNotApplicable) as info:
            superdense_step(plus.init, [a, b], plus.events)
        assert info.value.name == "b"
        assert info.value.conjunct == Atom("alock-x")

    def test_lightning_fires_first_at_later_steps(self):
        art = compiled_match()
        plus = art.result
        report = validate_plus(plus, PlusPlan(((F(0), "start-match"),), F(3)), 1)
        for log in report.trace.steps[1:]:
            assert log.entries[0].name == "e-lightning"
            assert log.entries[0].state["gc"] == 0


class TestIntegrate:
    def test_single_process(self):
        proc = Process("p", TRUE, (("x", Const(2)),))
        assert integrate_processes(State({"x": F(1)}), [proc], F(1, 2))["x"] == 2

    def test_inactive_process(self):
        proc = Process("p", Atom("on"), (("x", Const(2)),))
        s = State({"x": F(1), "on": False})
        assert integrate_processes(s, [proc], F(1, 2)) == s

    def test_additive(self):
        procs = [Process("p1", TRUE, (("x", Const(1)),)), Process("p2", TRUE, (("x", Const(3)),))]
        assert integrate_processes(State({"x": F(0)}), procs, F(1, 4))["x"] == 1

    def test_rates_read_pre_state(self):
        procs = [
            Process("grow", TRUE, (("x", FluentRef("x")),)),
            Process("copy", TRUE, (("y", FluentRef("x")),)),
        ]
        out = integrate_processes(State({"x": F(1), "y": F(0)}), procs, F(1))
        assert out["x"] == 2 and out["y"] == 1


class TestValidatePlus:
    def test_ill_formed_time(self):
        report = validate_plus(tank(), PlusPlan(((F(1, 3), "open-valve"),), F(1)), F(1, 2))
        assert not report.valid and report.ill_formed

    def test_makespan_before_last_action(self):
        report = validate_plus(tank(), PlusPlan(((F(2), "open-valve"),), F(1)), 1)
        assert report.ill_formed

    def test_unknown_action(self):
        report = validate_plus(tank(), PlusPlan(((F(0), "nope"),), F(1)), 1)
        assert report.ill_formed

    def test_zero_delta(self):
        with pytest.raises(ValueError):
            validate_plus(tank(), PlusPlan((), F(1)), 0)

    def test_compiled_match_valid(self):
        art = compiled_match()
        report = validate_plus(art.result, PlusPlan(((F(0), "start-match"),), F(3)), 1)
        assert report.valid
        ((step, entry),) = report.trace.fired("end-match")
        assert step == 2
        final = report.trace.states[3]
        assert final["lit"] is False and final["oc"] == 0 and final["ok"] is True

    def test_compiled_match_too_short(self):
        art = compiled_match()
        report = validate_plus(art.result, PlusPlan(((F(0), "start-match"),), F(1)), 1)
        assert not report.valid and report.failure.phase == "goal"
        assert report.trace.states[1]["oc"] == 1

    def test_tank_valid(self):
        plan = PlusPlan(((F(0), "open-valve"), (F(2), "close-valve")), F(3))
        report = validate_plus(tank(), plan, 1)
        assert report.valid
        assert report.trace.states[-1]["level"] == 4

    def test_tank_overflow_event(self):
        plan = PlusPlan(((F(0), "open-valve"), (F(3), "close-valve")), F(4))
        report = validate_plus(tank(), plan, 1)
        assert not report.valid
        assert report.trace.fired("overflow")

    def test_action_failure_reports_step_and_name(self):
        plan = PlusPlan(((F(1), "close-valve"),), F(1))
        report = validate_plus(tank(), plan, 1)
        assert report.failure.phase == "action"
        assert report.failure.step == 1 and report.failure.name == "close-valve"

    def test_actions_at_makespan_do_not_reach_goal(self):
        plan = PlusPlan(((F(0), "open-valve"), (F(2), "close-valve")), F(2))
        report = validate_plus(tank(), plan, 1)
        assert report.failure.phase == "goal"

    def test_deterministic(self):
        art = compiled_match()
        plan = PlusPlan(((F(0), "start-match"),), F(3))
        a = validate_plus(art.result, plan, 1)
        b = validate_plus(art.result, plan, 1)
        assert a.to_json(with_trace=True) == b.to_json(with_trace=True)

    def test_confluence_warning(self):
        fl = (Fluent("p", BOOL), Fluent("q", BOOL), Fluent("r", BOOL))
        e1 = Event("e1", Atom("p"), (set_false("p"), set_true("q")))
        e2 = Event("e2", Atom("p"), (set_false("p"), set_true("r")))
        prob = PlusProblem(fl, {"p": True, "q": False, "r": False}, TRUE, (), (e1, e2), ())
        report = validate_plus(prob, PlusPlan((), F(1)), 1, check_confluence=True)
        assert report.valid and report.warnings


@pytest.mark.parametrize("rate,steps", [(Const(1), 4), (Const(F(3, 2)), 3), (Const(-2), 5)])
def test_delta_refinement_on_constant_rates(rate, steps):
    fl = (Fluent("x", NUM), Fluent("y", NUM))
    procs = (Process("px", TRUE, (("x", rate),)), Process("py", TRUE, (("y", Const(1)),)))
    prob = PlusProblem(fl, {"x": F(0), "y": F(1)}, TRUE, (), (), procs)
    t_e = F(steps)
    coarse = validate_plus(prob, PlusPlan((), t_e), 1).trace.states[-1]
    fine = validate_plus(prob, PlusPlan((), t_e), F(1, 2)).trace.states[-1]
    finer = validate_plus(prob, PlusPlan((), t_e), F(1, 4)).trace.states[-1]
    assert coarse == fine == finer
