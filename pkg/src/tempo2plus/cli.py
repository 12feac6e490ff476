"""Command line interface.

Exit codes: 0 success/valid, 1 invalid plan or disagreement, 2 input
error, 3 resource exhaustion or divergent event completion.  The JSON
report goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

from . import __version__
from .bridge import PlanStructureError, lift_plan, lower_plan
from .compiler import CompilationArtifacts, CompilationError, compile_problem
from .model import ModelError, PlusProblem, format_number
from .pddl import (
    PDDLSyntaxError,
    GroundingError,
    PlanFormatError,
    parse_domain_problem,
    parse_plus_plan,
    parse_temporal_plan,
    print_plus,
    print_plus_plan,
    print_temporal_plan,
    ground,
    ground_plus,
)
from .plus import DivergenceError, validate_plus
from .solver import BUDGET, EXHAUSTED, solve
from .temporal import PlanError, validate_temporal

OK, INVALID, INPUT_ERROR, RESOURCE = 0, 1, 2, 3
SCHEMA = 1
BUDGET_ENV = "TEMPO2PLUS_NODE_BUDGET"

log = logging.getLogger("tempo2plus")


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _emit(report: dict):
    print(json.dumps({"schema": SCHEMA, **report}, indent=2))


def _delta(text: str) -> Fraction:
    try:
        d = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"delta must be a positive rational, got {text!r}") from None
    if d <= 0:
        raise InputError(f"delta must be positive, got {text}")
    return d


def _load(args):
    domain, problem = parse_domain_problem(_read(args.domain), _read(args.problem))
    return domain, problem


def _temporal(args):
    return ground(*_load(args))


def _plus_problem(args, force_compile=False) -> tuple[PlusProblem, CompilationArtifacts | None]:
    domain, problem = _load(args)
    if domain.durative or force_compile:
        art = compile_problem(ground(domain, problem))
        return art.result, art
    return ground_plus(domain, problem), None


def _node_budget(args) -> int | None:
    if getattr(args, "node_budget", None) is not None:
        return args.node_budget
    raw = os.environ.get(BUDGET_ENV)
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise InputError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    return None


# -- commands -------------------------------------------------------------


def cmd_compile(args) -> int:
    art = compile_problem(_temporal(args), expire_events=not args.no_expire)
    domain_text, problem_text = print_plus(art.result)
    if args.out_domain:
        _write(args.out_domain, domain_text)
    if args.out_problem:
        _write(args.out_problem, problem_text)
    if args.name_map:
        _write(args.name_map, json.dumps(art.to_json(), indent=2) + "\n")
    report = {
        "command": "compile",
        "sizes": {
            "fluents": len(art.result.fluents),
            "actions": len(art.result.actions),
            "events": len(art.result.events),
            "processes": len(art.result.processes),
        },
        "out_domain": args.out_domain,
        "out_problem": args.out_problem,
    }
    if not args.out_domain and not args.out_problem:
        report["domain"] = domain_text
        report["problem"] = problem_text
    _emit(report)
    return OK


def cmd_validate_temporal(args) -> int:
    problem = _temporal(args)
    plan = parse_temporal_plan(_read(args.plan))
    report = validate_temporal(problem, plan)
    out = report.to_json(with_trace=bool(args.trace))
    if args.trace:
        _write(args.trace, json.dumps(report.to_json(with_trace=True), indent=2) + "\n")
    if args.csv:
        from .report import temporal_trace_csv

        _write(args.csv, temporal_trace_csv(report.times, report.trace))
    if args.plot:
        from .report import plot_temporal_plan

        plot_temporal_plan(plan, args.plot)
    out.pop("trace", None)
    print(report.summary(), file=sys.stderr)
    _emit({"command": "validate-temporal", **out})
    return OK if report.valid else INVALID


def cmd_validate_plus(args) -> int:
    delta = _delta(args.delta)
    problem, _ = _plus_problem(args, args.compile)
    plan = parse_plus_plan(_read(args.plan))
    report = validate_plus(problem, plan, delta, check_confluence=args.confluence)
    _plus_outputs(args, problem, report)
    print(report.summary(), file=sys.stderr)
    out = report.to_json()
    if report.ill_formed:
        out["reason"] = "ill-formed"
    _emit({"command": "validate-plus", **out})
    return OK if report.valid else INVALID


def _plus_outputs(args, problem, report):
    if getattr(args, "trace", None):
        _write(args.trace, json.dumps(report.to_json(with_trace=True), indent=2) + "\n")
    if report.trace is None:
        return
    if getattr(args, "csv", None):
        from .report import trace_csv

        _write(args.csv, trace_csv(report.trace))
    if getattr(args, "plot", None):
        from .report import plot_plus_trace

        plot_plus_trace(report.trace, problem, args.plot)


def cmd_lift(args) -> int:
    art = compile_problem(_temporal(args))
    plus_plan = parse_plus_plan(_read(args.plan))
    plan = lift_plan(art, plus_plan)
    text = print_temporal_plan(plan)
    if args.out:
        _write(args.out, text)
    _emit({"command": "lift", "plan": text, "entries": len(plan)})
    return OK


def cmd_lower(args) -> int:
    problem = _temporal(args)
    art = compile_problem(problem)
    plan = parse_temporal_plan(_read(args.plan))
    low = lower_plan(problem, art, plan)
    for w in low.warnings:
        print(f"warning: {w}", file=sys.stderr)
    text = print_plus_plan(low.plan)
    if args.out:
        _write(args.out, text)
    _emit(
        {
            "command": "lower",
            "plan": text,
            "makespan": format_number(low.plan.makespan),
            "delta": low.delta.to_json(),
            "warnings": low.warnings,
        }
    )
    return OK


def cmd_solve(args) -> int:
    delta = _delta(args.delta)
    problem, _ = _plus_problem(args, args.compile)
    result = solve(problem, delta, args.horizon, args.max_actions, _node_budget(args))
    report = {
        "command": "solve",
        "status": result.status,
        "delta": format_number(delta),
        "horizon": args.horizon,
        "stats": result.stats.to_json(),
    }
    if result.solved:
        text = print_plus_plan(result.plan)
        report["plan"] = text
        if args.out:
            _write(args.out, text)
    print(f"solve: {result.status}", file=sys.stderr)
    _emit(report)
    return OK if result.solved else RESOURCE


def cmd_roundtrip(args) -> int:
    delta = _delta(args.delta)
    problem = _temporal(args)
    art = compile_problem(problem)
    stages: list[dict] = []
    report = {"command": "roundtrip", "stages": stages}
    code = OK

    def stage(name, ok, **extra):
        stages.append({"stage": name, "ok": ok, **extra})
        return ok

    if args.plan:
        plan = parse_temporal_plan(_read(args.plan))
        tv = validate_temporal(problem, plan)
        if not stage("validate-temporal-input", tv.valid, report=tv.to_json()):
            report["failed_stage"] = "validate-temporal-input"
            _emit(report)
            return INVALID
        low = lower_plan(problem, art, plan, check=False)
        pv = validate_plus(art.result, low.plan, low.delta.delta)
        stage(
            "lower+validate-plus",
            pv.valid,
            plan=print_plus_plan(low.plan),
            delta=low.delta.to_json(),
            report=pv.to_json(),
            length_bound=len(low.plan) <= 2 * len(plan),
        )
        if not pv.valid:
            report["failed_stage"] = "lower+validate-plus"
            code = INVALID

    result = solve(art.result, delta, args.horizon, node_budget=_node_budget(args))
    stage("solve", result.solved, status=result.status, stats=result.stats.to_json())
    if not result.solved:
        report["status"] = result.status
        _emit(report)
        return RESOURCE if code == OK else code
    pv = validate_plus(art.result, result.plan, delta)
    stage("validate-plus", pv.valid, plan=print_plus_plan(result.plan), report=pv.to_json())
    if args.plot and pv.trace:
        from .report import plot_plus_trace

        plot_plus_trace(pv.trace, art.result, args.plot)
    lifted = lift_plan(art, result.plan)
    tv = validate_temporal(problem, lifted)
    stage("lift+validate-temporal", tv.valid, plan=print_temporal_plan(lifted), report=tv.to_json())
    if not (pv.valid and tv.valid):
        report["failed_stage"] = next(s["stage"] for s in stages if not s["ok"])
        code = INVALID
    _emit(report)
    return code


# -- wiring ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tempo2plus",
        description="Compile temporal planning problems to PDDL+ and validate plans.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def files(sp, plan=False):
        sp.add_argument("domain")
        sp.add_argument("problem")
        if plan:
            sp.add_argument("plan")

    sp = sub.add_parser("compile", help="write the PDDL+ compilation")
    files(sp)
    sp.add_argument("--out-domain")
    sp.add_argument("--out-problem")
    sp.add_argument("--no-expire", action="store_true", help="omit upper-bound expiry events")
    sp.add_argument("--name-map", help="write the compiled-element name map as JSON")
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("validate-temporal", help="validate a temporal plan")
    files(sp, plan=True)
    sp.add_argument("--trace", help="write the full report with the state trace")
    sp.add_argument("--csv", help="write the state trace as CSV")
    sp.add_argument("--plot", help="render a Gantt chart of the plan")
    sp.set_defaults(func=cmd_validate_temporal)

    sp = sub.add_parser("validate-plus", help="validate a PDDL+ plan (discrete time)")
    files(sp, plan=True)
    sp.add_argument("--delta", default="1")
    sp.add_argument("--compile", action="store_true", help="compile the (temporal) input first")
    sp.add_argument("--confluence", action="store_true", help="warn on order-sensitive events")
    sp.add_argument("--trace", help="write the full report with the superdense log")
    sp.add_argument("--csv", help="write the discrete state trace as CSV")
    sp.add_argument("--plot", help="render the fluent trajectories")
    sp.set_defaults(func=cmd_validate_plus)

    sp = sub.add_parser("lift", help="PDDL+ plan of the compilation -> temporal plan")
    files(sp, plan=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_lift)

    sp = sub.add_parser("lower", help="temporal plan -> PDDL+ plan of the compilation")
    files(sp, plan=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_lower)

    sp = sub.add_parser("solve", help="bounded search for a PDDL+ plan")
    files(sp)
    sp.add_argument("--delta", default="1")
    sp.add_argument("--horizon", type=int, default=10)
    sp.add_argument("--max-actions", type=int, default=None)
    sp.add_argument("--node-budget", type=int, default=None)
    sp.add_argument("--compile", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("roundtrip", help="check both plan translations end to end")
    files(sp)
    sp.add_argument("--delta", default="1")
    sp.add_argument("--horizon", type=int, default=12)
    sp.add_argument("--plan", help="temporal plan to lower and validate as well")
    sp.add_argument("--plot", help="render the solver plan's fluent trajectories")
    sp.set_defaults(func=cmd_roundtrip)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (
        InputError,
        PDDLSyntaxError,
        GroundingError,
        PlanFormatError,
        PlanError,
        PlanStructureError,
        ModelError,
        CompilationError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RESOURCE


if __name__ == "__main__":
    sys.exit(main())
