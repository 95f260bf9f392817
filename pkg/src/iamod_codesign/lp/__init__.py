"""Dense linear programming used by the flow layer."""
from .simplex import (
    FEAS_TOL,
    OPT_TOL,
    PIVOT_FLOOR,
    PIVOT_TOL,
    LinearProgram,
    LpError,
    LpSolution,
    LpStatus,
    MalformedLPError,
    SolverFailure,
    available_kernels,
    default_kernel,
    solve_lp,
)

__all__ = [
    "FEAS_TOL",
    "OPT_TOL",
    "PIVOT_FLOOR",
    "PIVOT_TOL",
    "LinearProgram",
    "LpError",
    "LpSolution",
    "LpStatus",
    "MalformedLPError",
    "SolverFailure",
    "available_kernels",
    "default_kernel",
    "solve_lp",
]
