"""Separable convex minimization under ascending prefix constraints."""

from ascendopt.costs import DSeparable, PhiKind, PiecewiseLinear, PowerP, Quadratic
from ascendopt.errors import (
    AscendError,
    CapabilityError,
    InfeasibleError,
    InvariantError,
    NumericalError,
    ProblemFileError,
)
from ascendopt.problem import Allocation, Instance, check_constraints, is_feasible

__all__ = [
    "Allocation", "AscendError", "CapabilityError", "DSeparable", "InfeasibleError", "Instance",
    "InvariantError", "NumericalError", "PhiKind", "PiecewiseLinear", "PowerP", "ProblemFileError",
    "Quadratic", "check_constraints", "is_feasible",
]
__version__ = "0.1.0"
