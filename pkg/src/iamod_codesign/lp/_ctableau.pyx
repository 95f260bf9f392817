# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tableau kernel. Same contract and pivot sequence as ``_pykernel``."""

from libc.math cimport fabs

cdef enum:
    OPTIMAL = 0
    UNBOUNDED = 1
    ITERATION_LIMIT = 2
    BREAKDOWN = 3


cdef void _pivot(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t row, Py_ssize_t col) noexcept nogil:
    cdef Py_ssize_t nrows = T.shape[0], ncols = T.shape[1]
    cdef Py_ssize_t i, j
    cdef double piv = T[row, col]
    cdef double f
    for j in range(ncols):
        T[row, j] = T[row, j] / piv
    for i in range(nrows):
        if i == row:
            continue
        f = T[i, col]
        if f != 0.0:
            for j in range(ncols):
                T[i, j] = T[i, j] - f * T[row, j]
            T[i, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def pivot(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t row, Py_ssize_t col):
    with nogil:
        _pivot(T, basis, row, col)


cdef int _run(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t m, Py_ssize_t obj_row,
              Py_ssize_t n_enter, double opt_tol, double pivot_tol, double pivot_floor,
              Py_ssize_t max_iter, Py_ssize_t* iters) noexcept nogil:
    cdef Py_ssize_t rhs = T.shape[1] - 1
    cdef Py_ssize_t it = 0, col, i, best
    cdef double a, ratio, best_ratio, tie
    while True:
        if it >= max_iter:
            iters[0] = it
            return ITERATION_LIMIT
        col = -1
        for i in range(n_enter):
            if T[obj_row, i] < -opt_tol:
                col = i
                break
        if col < 0:
            iters[0] = it
            return OPTIMAL
        best = -1
        best_ratio = 0.0
        for i in range(m):
            a = T[i, col]
            if a > pivot_tol:
                # roundoff can leave a basic value slightly negative; treat it as a zero step
                ratio = (T[i, rhs] if T[i, rhs] > 0.0 else 0.0) / a
                if best < 0:
                    best = i
                    best_ratio = ratio
                    continue
                tie = 1e-12 * (fabs(best_ratio) if fabs(best_ratio) > 1.0 else 1.0)
                if ratio < best_ratio - tie or (ratio <= best_ratio + tie and basis[i] < basis[best]):
                    best = i
                    best_ratio = ratio
        if best < 0:
            iters[0] = it
            return UNBOUNDED
        if fabs(T[best, col]) < pivot_floor:
            iters[0] = it
            return BREAKDOWN
        _pivot(T, basis, best, col)
        it += 1


def run_simplex(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t m, Py_ssize_t obj_row,
                Py_ssize_t n_enter, double opt_tol, double pivot_tol, double pivot_floor,
                Py_ssize_t max_iter):
    cdef Py_ssize_t iters = 0
    cdef int status
    with nogil:
        status = _run(T, basis, m, obj_row, n_enter, opt_tol, pivot_tol, pivot_floor,
                      max_iter, &iters)
    return status, iters
