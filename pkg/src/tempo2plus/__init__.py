"""Compile temporal planning problems with durative actions into PDDL+,
validate plans under both semantics and translate plans between them."""

__version__ = "0.1.0"

from .bridge import DeltaChoice, lift_plan, lower_plan, select_delta
from .compiler import CompilationArtifacts, compile_problem, lock_effects, lock_precondition
from .model import (
    DurativeAction,
    Event,
    InstantAction,
    PlusPlan,
    PlusProblem,
    Process,
    State,
    TemporalPlan,
    TemporalProblem,
    apply,
    evaluate,
    interference_sets,
)
from .plus import validate_plus
from .solver import solve
from .temporal import validate_temporal

__all__ = [
    "CompilationArtifacts",
    "DeltaChoice",
    "DurativeAction",
    "Event",
    "InstantAction",
    "PlusPlan",
    "PlusProblem",
    "Process",
    "State",
    "TemporalPlan",
    "TemporalProblem",
    "apply",
    "compile_problem",
    "evaluate",
    "interference_sets",
    "lift_plan",
    "lock_effects",
    "lock_precondition",
    "lower_plan",
    "select_delta",
    "solve",
    "validate_plus",
    "validate_temporal",
]
