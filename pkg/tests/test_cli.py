import json
import subprocess
import sys
from pathlib import Path

import pytest

from tempo2plus.cli import main

FIX = Path(__file__).parent / "fixtures"
MATCH = [str(FIX / "match_domain.pddl"), str(FIX / "match_problem.pddl")]
CELLAR = [str(FIX / "matchcellar_domain.pddl"), str(FIX / "matchcellar_problem.pddl")]
TANK = [str(FIX / "counter_plus_domain.pddl"), str(FIX / "counter_plus_problem.pddl")]

SWITCH_DOMAIN = """
(define (domain switch)
  (:requirements :durative-actions)
  (:predicates (on) (done))
  (:action turn-on :parameters () :precondition (and) :effect (on))
  (:action turn-off :parameters () :precondition (and) :effect (not (on)))
  (:durative-action work :parameters () :duration (= ?duration 1)
    :condition (and) :effect (at end (done))))
"""
SWITCH_PROBLEM = "(define (problem s1) (:domain switch) (:init) (:goal (and (done) (on))))"
IMPOSSIBLE_PROBLEM = "(define (problem s2) (:domain switch) (:init) (:goal (and (on) (not (on)))))"

FLIPFLOP_DOMAIN = """
(define (domain flipflop)
  (:requirements :time)
  (:predicates (p))
  (:event flip :parameters () :precondition (p) :effect (not (p)))
  (:event flop :parameters () :precondition (not (p)) :effect (p)))
"""
FLIPFLOP_PROBLEM = "(define (problem f1) (:domain flipflop) (:init (p)) (:goal (p)))"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    report = json.loads(out) if out.strip() else None
    return code, report, err


@pytest.fixture
def switch(tmp_path):
    d, p = tmp_path / "switch_domain.pddl", tmp_path / "switch_problem.pddl"
    d.write_text(SWITCH_DOMAIN)
    p.write_text(SWITCH_PROBLEM)
    return tmp_path, [str(d), str(p)]


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestCompile:
    def test_writes_files_and_name_map(self, capsys, tmp_path):
        d, p, m = tmp_path / "d.pddl", tmp_path / "p.pddl", tmp_path / "names.json"
        code, report, _ = run(capsys, "compile", *MATCH, "--out-domain", d, "--out-problem", p, "--name-map", m)
        assert code == 0 and report["schema"] == 1
        assert d.read_text() == (FIX / "golden/match_plus_domain.pddl").read_text()
        names = json.loads(m.read_text())["elements"]
        assert names["end-match"] == {"source": "match", "role": "end-fix-event"}

    def test_no_expire(self, capsys, tmp_path):
        d = tmp_path / "d.pddl"
        dom = write(tmp_path, "v.pddl", SWITCH_DOMAIN.replace("(= ?duration 1)", "(and (>= ?duration 1) (<= ?duration 2))"))
        prob = write(tmp_path, "vp.pddl", SWITCH_PROBLEM)
        run(capsys, "compile", dom, prob, "--out-domain", d)
        assert "expire-work" in d.read_text()
        run(capsys, "compile", dom, prob, "--out-domain", d, "--no-expire")
        assert "expire-" not in d.read_text()

    def test_missing_file(self, capsys, tmp_path):
        missing = tmp_path / "nope.pddl"
        code, report, err = run(capsys, "compile", missing, MATCH[1])
        assert code == 2 and report is None
        assert str(missing) in err

    def test_parse_error(self, capsys, tmp_path):
        bad = write(tmp_path, "bad.pddl", "(define (domain x)")
        code, _, err = run(capsys, "compile", bad, MATCH[1])
        assert code == 2 and "line" in err


class TestValidate:
    def test_valid_temporal(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "0: (match) [2]\n")
        code, report, _ = run(capsys, "validate-temporal", *MATCH, plan)
        assert code == 0 and report["verdict"] == "valid"

    def test_condition_5(self, capsys, switch):
        tmp, files = switch
        plan = write(tmp, "plan.txt", "0: (turn-on)\n0: (turn-off)\n0: (work) [1]\n")
        code, report, _ = run(capsys, "validate-temporal", *files, plan)
        assert code == 1 and report["condition"] == 5

    def test_temporal_trace_csv_and_plot(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "0: (match) [2]\n")
        trace, table, fig = tmp_path / "t.json", tmp_path / "t.csv", tmp_path / "g.png"
        code, _, _ = run(capsys, "validate-temporal", *MATCH, plan, "--trace", trace, "--csv", table, "--plot", fig)
        assert code == 0
        assert len(json.loads(trace.read_text())["trace"]) == 3
        assert table.read_text().startswith("index,time")
        assert fig.stat().st_size > 0

    def test_plus_auto_compiles_temporal_input(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "0: (start-match)\n;; makespan 3\n")
        code, report, _ = run(capsys, "validate-plus", *MATCH, plan)
        assert code == 0 and report["verdict"] == "valid"

    def test_plus_ill_formed(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "1/3: (open-valve)\n;; makespan 1\n")
        code, report, _ = run(capsys, "validate-plus", *TANK, plan, "--delta", "1/2")
        assert code == 1 and report["reason"] == "ill-formed"

    def test_plus_zero_delta(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", ";; makespan 1\n")
        code, _, _ = run(capsys, "validate-plus", *TANK, plan, "--delta", "0")
        assert code == 2

    def test_plus_outputs(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "0: (open-valve)\n2: (close-valve)\n;; makespan 3\n")
        trace, table, fig = tmp_path / "t.json", tmp_path / "t.csv", tmp_path / "f.png"
        code, report, _ = run(capsys, "validate-plus", *TANK, plan, "--trace", trace, "--csv", table, "--plot", fig)
        assert code == 0
        assert json.loads(trace.read_text())["trace"][0]["step"] == 0
        assert table.read_text().splitlines()[0] == "step,time,alarm,level,open"
        assert fig.read_bytes()[:4] == b"\x89PNG"

    def test_divergence_exit_code(self, capsys, tmp_path):
        d = write(tmp_path, "d.pddl", FLIPFLOP_DOMAIN)
        p = write(tmp_path, "p.pddl", FLIPFLOP_PROBLEM)
        plan = write(tmp_path, "plan.txt", ";; makespan 1\n")
        code, _, err = run(capsys, "validate-plus", d, p, plan)
        assert code == 3 and "error" in err


class TestTranslate:
    def test_lift(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "0: (start-match)\n;; makespan 3\n")
        code, report, _ = run(capsys, "lift", *MATCH, plan)
        assert code == 0 and report["plan"] == "0: (match) [2]\n"

    def test_lower(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "0: (light_match m1) [8]\n1: (mend_fuse f1 m1) [5]\n")
        out = tmp_path / "plus.txt"
        code, report, _ = run(capsys, "lower", *CELLAR, plan, "--out", out)
        assert code == 0 and report["delta"]["delta"] == "1"
        assert "start-light_match m1" in out.read_text() or "start-light_match_m1" in out.read_text()


class TestSolve:
    def test_solve_writes_plan(self, capsys, tmp_path):
        out = tmp_path / "plan.txt"
        code, report, _ = run(capsys, "solve", *MATCH, "--horizon", "3", "--out", out)
        assert code == 0 and report["status"] == "solved"
        assert out.read_text() == "0: (start-match)\n;; makespan 3\n"
        assert "nodes_expanded" in report["stats"]

    def test_budget_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("TEMPO2PLUS_NODE_BUDGET", "2")
        code, report, _ = run(capsys, "solve", *CELLAR, "--horizon", "15")
        assert code == 3 and report["status"] == "budget"


class TestRoundtrip:
    def test_match(self, capsys):
        code, report, _ = run(capsys, "roundtrip", *MATCH)
        assert code == 0
        assert all(s["ok"] for s in report["stages"])

    def test_with_valid_plan(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "0: (light_match m1) [8]\n1: (mend_fuse f1 m1) [5]\n")
        fig = tmp_path / "rt.png"
        code, report, _ = run(capsys, "roundtrip", *CELLAR, "--plan", plan, "--horizon", "15", "--plot", fig)
        assert code == 0
        assert [s["stage"] for s in report["stages"]] == [
            "validate-temporal-input",
            "lower+validate-plus",
            "solve",
            "validate-plus",
            "lift+validate-temporal",
        ]
        assert fig.exists()

    def test_unsatisfiable(self, capsys, switch):
        tmp, files = switch
        impossible = write(tmp, "imp.pddl", IMPOSSIBLE_PROBLEM)
        code, report, _ = run(capsys, "roundtrip", files[0], impossible, "--horizon", "3")
        assert code == 3 and report["status"] == "exhausted"

    def test_invalid_input_plan(self, capsys, tmp_path):
        plan = write(tmp_path, "plan.txt", "0: (match) [2]\n1: (match) [2]\n")
        code, report, _ = run(capsys, "roundtrip", *MATCH, "--plan", plan)
        assert code == 1 and report["failed_stage"] == "validate-temporal-input"


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tempo2plus.cli", "--version"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "tempo2plus" in proc.stdout
