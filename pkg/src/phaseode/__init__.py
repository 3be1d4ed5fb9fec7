"""Phase-function solver for linear systems ``y' = A(t) y`` with oscillatory solutions.

The fundamental matrix is represented as ``Phi(t)^{-1} Theta(t)`` where
``Phi`` comes from a cyclic-vector reduction to a scalar equation and
``Theta`` is built from slowly-varying phase functions, so the cost of a
solve does not grow with the frequency.
"""

from .errors import (ArgumentError, ConvergenceError, DegeneracyError, DomainError,
                     DuplicateBranchError, IllConditionedError, LevinError, PhaseODEError,
                     PhaseOverflowError, RefinementError, SingularSystemError, StiffError)
from .levin import LevinWindow
from .oracle import error_metric, reference_bvp, reference_ivp
from .reduction import CyclicVector, SystemSpec
from .solver import (FundamentalMatrix, Solution, SolverInput, build, eval_M, frequency,
                     solve_bvp, solve_ivp)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "ConvergenceError", "CyclicVector", "DegeneracyError", "DomainError",
    "DuplicateBranchError", "FundamentalMatrix", "IllConditionedError", "LevinError",
    "LevinWindow", "PhaseODEError", "PhaseOverflowError", "RefinementError",
    "SingularSystemError", "Solution", "SolverInput", "StiffError", "SystemSpec", "build",
    "error_metric", "eval_M", "frequency", "reference_bvp", "reference_ivp", "solve_bvp",
    "solve_ivp",
]
