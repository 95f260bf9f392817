"""Pure-Python/numpy tableau kernel; mirrors ``_ctableau.pyx`` pivot for pivot."""
from __future__ import annotations

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2
BREAKDOWN = 3


def pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    piv = T[row, col]
    T[row] /= piv
    factors = T[:, col].copy()
    factors[row] = 0.0
    nz = np.flatnonzero(factors)
    if nz.size:
        T[nz] -= np.outer(factors[nz], T[row])
        T[nz, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def run_simplex(T, basis, m, obj_row, n_enter, opt_tol, pivot_tol, pivot_floor, max_iter):
    """Primal simplex iterations with Bland's rule on tableau ``T`` (in place).

    Rows ``0..m-1`` are constraints, every further row is an objective row of
    reduced costs; row ``obj_row`` drives pricing. The last column is the
    right-hand side. Only columns ``< n_enter`` may enter the basis.

    Returns ``(status, iterations)``.
    """
    rhs = T.shape[1] - 1
    it = 0
    while True:
        if it >= max_iter:
            return ITERATION_LIMIT, it
        cand = np.flatnonzero(T[obj_row, :n_enter] < -opt_tol)
        if cand.size == 0:
            return OPTIMAL, it
        col = int(cand[0])

        column = T[:m, col]
        rows = np.flatnonzero(column > pivot_tol)
        if rows.size == 0:
            return UNBOUNDED, it
        # roundoff can leave a basic value slightly negative; treat it as a zero step
        ratios = np.maximum(T[rows, rhs], 0.0) / column[rows]
        best = -1
        best_ratio = 0.0
        for r, ratio in zip(rows.tolist(), ratios.tolist()):
            if best < 0:
                best, best_ratio = r, ratio
                continue
            tie = 1e-12 * max(1.0, abs(best_ratio))
            if ratio < best_ratio - tie or (ratio <= best_ratio + tie and basis[r] < basis[best]):
                best, best_ratio = r, ratio
        if abs(T[best, col]) < pivot_floor:
            return BREAKDOWN, it
        pivot(T, basis, best, col)
        it += 1
