"""Two-phase primal simplex on a dense tableau with Bland's anti-cycling rule.

Problems are given in the form::

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                x >= 0

The pivoting loop runs in a compiled kernel when the extension module is
available and in a numpy implementation otherwise; both follow the same
pivot sequence. Set ``IAMOD_CODESIGN_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

import numpy as np

from . import _pykernel

try:  # pragma: no cover - depends on the build
    from . import _ctableau
except ImportError:  # pragma: no cover
    _ctableau = None

__all__ = [
    "FEAS_TOL",
    "OPT_TOL",
    "PIVOT_TOL",
    "PIVOT_FLOOR",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "LpError",
    "MalformedLPError",
    "SolverFailure",
    "solve_lp",
    "available_kernels",
    "default_kernel",
]

FEAS_TOL = 1e-6      # constraint residual, scaled by the row magnitude
OPT_TOL = 1e-9       # reduced-cost threshold for entering columns
PIVOT_TOL = 1e-9     # minimum column entry considered in the ratio test
PIVOT_FLOOR = 1e-11  # pivots smaller than this are a numerical breakdown


class LpError(Exception):
    """Base class for LP layer errors."""


class MalformedLPError(LpError, ValueError):
    """Inconsistent dimensions or non-finite coefficients."""


class SolverFailure(LpError, RuntimeError):
    """Numerical breakdown or iteration limit; not a verdict on the LP itself."""


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _as_matrix(a, ncols: int, name: str) -> np.ndarray:
    if a is None:
        return np.zeros((0, ncols))
    arr = np.asarray(a, dtype=float)
    if arr.size == 0:
        return np.zeros((0, ncols))
    if arr.ndim != 2 or arr.shape[1] != ncols:
        raise MalformedLPError(f"{name} must have shape (k, {ncols}), got {arr.shape}")
    return arr


def _as_vector(b, rows: int, name: str) -> np.ndarray:
    if b is None:
        b = []
    arr = np.asarray(b, dtype=float).reshape(-1)
    if arr.shape[0] != rows:
        raise MalformedLPError(f"{name} has {arr.shape[0]} entries, expected {rows}")
    return arr


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.shape[0]
        if n == 0:
            raise MalformedLPError("LP has no variables")
        A_eq = _as_matrix(self.A_eq, n, "A_eq")
        A_ub = _as_matrix(self.A_ub, n, "A_ub")
        b_eq = _as_vector(self.b_eq, A_eq.shape[0], "b_eq")
        b_ub = _as_vector(self.b_ub, A_ub.shape[0], "b_ub")
        for name, arr in (("c", c), ("A_eq", A_eq), ("b_eq", b_eq), ("A_ub", A_ub), ("b_ub", b_ub)):
            if not np.all(np.isfinite(arr)):
                raise MalformedLPError(f"{name} contains non-finite coefficients")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "A_ub", A_ub)
        object.__setattr__(self, "b_ub", b_ub)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    def residuals(self, x: np.ndarray) -> tuple[float, float, float]:
        """Max |A_eq x - b_eq|, max (A_ub x - b_ub)^+, max (-x)^+."""
        eq = float(np.max(np.abs(self.A_eq @ x - self.b_eq), initial=0.0))
        ub = float(np.max(self.A_ub @ x - self.b_ub, initial=0.0))
        neg = float(np.max(-x, initial=0.0))
        return eq, max(ub, 0.0), max(neg, 0.0)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0
    kernel: str = field(default="", compare=False)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def available_kernels() -> list[str]:
    return (["cython"] if _ctableau is not None else []) + ["python"]


def default_kernel() -> str:
    if os.environ.get("IAMOD_CODESIGN_PURE_PYTHON", "") not in ("", "0"):
        return "python"
    return available_kernels()[0]


def _kernel_module(kernel: str | None):
    kernel = kernel or default_kernel()
    if kernel == "cython":
        if _ctableau is None:
            raise ValueError("compiled kernel is not built; reinstall the package with Cython available")
        return kernel, _ctableau
    if kernel == "python":
        return kernel, _pykernel
    raise ValueError(f"unknown kernel {kernel!r}")


def _row_scale(A: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    return 1.0 + np.abs(b) + np.abs(A) @ np.abs(x)


def solve_lp(lp: LinearProgram, *, kernel: str | None = None, max_iter: int | None = None) -> LpSolution:
    """Solve ``lp`` to a vertex optimum or classify it as infeasible/unbounded.

    Raises :class:`SolverFailure` when pivoting breaks down or the final point
    misses the constraints by more than :data:`FEAS_TOL` (scaled per row).
    """
    name, kmod = _kernel_module(kernel)
    n = lp.n
    m_eq, m_ub = lp.A_eq.shape[0], lp.A_ub.shape[0]
    m = m_eq + m_ub
    n_std = n + m_ub  # structural + slack columns

    A = np.zeros((m, n_std))
    A[:m_eq, :n] = lp.A_eq
    A[m_eq:, :n] = lp.A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([lp.b_eq, lp.b_ub])
    flip = b < 0
    A[flip] *= -1.0
    b = np.where(flip, -b, b)

    needs_art = np.ones(m, dtype=bool)
    needs_art[m_eq:] = flip[m_eq:]
    art_rows = np.flatnonzero(needs_art)
    k = art_rows.size
    ncols = n_std + k

    if max_iter is None:
        max_iter = 50 * (m + ncols) + 1000

    # rows 0..m-1 constraints, row m phase-2 costs, row m+1 phase-1 costs
    T = np.zeros((m + 2, ncols + 1))
    T[:m, :n_std] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=np.intp)
    for r in range(m_eq, m):
        basis[r] = n + (r - m_eq)
    for a, r in enumerate(art_rows):
        T[r, n_std + a] = 1.0
        basis[r] = n_std + a
    T[m, :n] = lp.c
    if k:
        T[m + 1, :n_std] = -A[art_rows].sum(axis=0)
        T[m + 1, -1] = -b[art_rows].sum()

    iterations = 0
    if k:
        status, it = kmod.run_simplex(T, basis, m, m + 1, n_std, OPT_TOL, PIVOT_TOL, PIVOT_FLOOR, max_iter)
        iterations += it
        if status == _pykernel.ITERATION_LIMIT:
            raise SolverFailure(f"phase 1 hit the iteration limit ({max_iter})")
        if status == _pykernel.BREAKDOWN:
            raise SolverFailure("phase 1 pivot below the breakdown floor")
        # phase 1 is bounded below by zero, so UNBOUNDED cannot occur
        infeasibility = -T[m + 1, -1]
        if infeasibility > FEAS_TOL * max(1.0, float(np.max(b, initial=0.0))):
            return LpSolution(LpStatus.INFEASIBLE, iterations=iterations, kernel=name)

        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] < n_std:
                continue
            row = np.abs(T[r, :n_std])
            j = int(np.argmax(row)) if n_std else 0
            if n_std and row[j] > PIVOT_TOL:
                # the artificial sits at roundoff level; pin it to zero so the
                # pivot is degenerate and cannot shift the other basics
                T[r, -1] = 0.0
                kmod.pivot(T, basis, r, j)
            else:
                keep[r] = False
        rows = np.concatenate([np.flatnonzero(keep), [m]])
        T = np.ascontiguousarray(T[np.ix_(rows, np.r_[np.arange(n_std), ncols])])
        basis = np.ascontiguousarray(basis[keep])
        A_kept, b_kept = A[keep], b[keep]
    else:
        T = np.ascontiguousarray(T[: m + 1])
        A_kept, b_kept = A, b

    m2 = basis.shape[0]
    status, it = kmod.run_simplex(T, basis, m2, m2, n_std, OPT_TOL, PIVOT_TOL, PIVOT_FLOOR, max_iter)
    iterations += it
    if status == _pykernel.ITERATION_LIMIT:
        raise SolverFailure(f"phase 2 hit the iteration limit ({max_iter})")
    if status == _pykernel.BREAKDOWN:
        raise SolverFailure("phase 2 pivot below the breakdown floor")
    if status == _pykernel.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, iterations=iterations, kernel=name)

    x_std = np.zeros(n_std)
    x_std[basis] = T[:m2, -1]
    # refine the basic solution against the original data
    if m2:
        try:
            xb = np.linalg.solve(A_kept[:, basis], b_kept)
        except np.linalg.LinAlgError:
            xb = None
        if xb is not None and np.all(np.isfinite(xb)):
            cand = np.zeros(n_std)
            cand[basis] = xb
            if np.max(np.abs(cand - x_std)) <= FEAS_TOL * (1.0 + np.max(np.abs(x_std))):
                x_std = cand
    scale = 1.0 + np.abs(x_std)
    if np.any(x_std < -FEAS_TOL * scale):
        raise SolverFailure("basic solution has negative components beyond tolerance")
    x_std = np.maximum(x_std, 0.0)
    x = x_std[:n]

    if lp.A_eq.shape[0]:
        r_eq = np.abs(lp.A_eq @ x - lp.b_eq) / _row_scale(lp.A_eq, lp.b_eq, x)
        if np.max(r_eq) > FEAS_TOL:
            raise SolverFailure(f"equality residual {np.max(r_eq):.3g} exceeds tolerance")
    if lp.A_ub.shape[0]:
        r_ub = (lp.A_ub @ x - lp.b_ub) / _row_scale(lp.A_ub, lp.b_ub, x)
        if np.max(r_ub) > FEAS_TOL:
            raise SolverFailure(f"inequality violation {np.max(r_ub):.3g} exceeds tolerance")
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        objective_value=float(lp.c @ x),
        iterations=iterations,
        kernel=name,
    )
