"""PDDL front-end: parsing, grounding, printing and plan files."""

from .grounding import GroundingError, ground, ground_plus
from .parser import (
    LiftedDomain,
    LiftedProblem,
    PDDLTypeError,
    UnsupportedFeature,
    parse_domain,
    parse_problem,
)
from .plans import (
    PlanFormatError,
    parse_plus_plan,
    parse_temporal_plan,
    print_plus_plan,
    print_temporal_plan,
)
from .printer import print_plus, plus_name_maps
from .sexpr import PDDLSyntaxError


def parse_domain_problem(domain_text: str, problem_text: str):
    domain = parse_domain(domain_text)
    return domain, parse_problem(problem_text, domain)


def load_temporal(domain_text: str, problem_text: str):
    return ground(*parse_domain_problem(domain_text, problem_text))


def load_plus(domain_text: str, problem_text: str):
    return ground_plus(*parse_domain_problem(domain_text, problem_text))


__all__ = [
    "GroundingError",
    "LiftedDomain",
    "LiftedProblem",
    "PDDLSyntaxError",
    "PDDLTypeError",
    "PlanFormatError",
    "UnsupportedFeature",
    "ground",
    "ground_plus",
    "load_plus",
    "load_temporal",
    "parse_domain",
    "parse_domain_problem",
    "parse_plus_plan",
    "parse_problem",
    "parse_temporal_plan",
    "plus_name_maps",
    "print_plus",
    "print_plus_plan",
    "print_temporal_plan",
]
