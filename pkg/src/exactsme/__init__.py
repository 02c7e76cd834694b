"""Exact set-membership state estimation by boundary propagation of support directions."""

from .errors import (ConePrecondition, ConfigError, DegenerateFront, EmptyFront, EstimationError, Infeasible,
                     NotCoprime, NotFeasible, Unbounded)
from .geometry import Polytope, SupportCone, convex_hull
from .oracle import ProblemHistory, exact_set_recursion, solve_estimator, solve_regulator
from .plant import PlantSpec, System, validate_plant
from .propagation import Front, compute_M, partition_R, propagate_front, propagate_point, seed_front
from .simulate import simulate
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ConePrecondition", "ConfigError", "DegenerateFront", "EmptyFront", "EstimationError", "Infeasible",
    "NotCoprime", "NotFeasible", "Unbounded", "Polytope", "SupportCone", "convex_hull", "ProblemHistory",
    "exact_set_recursion", "solve_estimator", "solve_regulator", "PlantSpec", "System", "validate_plant",
    "Front", "compute_M", "partition_R", "propagate_front", "propagate_point", "seed_front", "simulate",
    "DEFAULT", "Tolerances",
]
