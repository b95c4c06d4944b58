# cython: language_level=3
"""Compiled hot loops: tridiagonal elimination and 1-D optimal partitioning.

Semantics match :mod:`principal_points._kernels_py` exactly; that module is
used whenever this extension is unavailable.
"""
from libc.math cimport INFINITY

import numpy as np

from principal_points.errors import SingularMatrixError

cdef double PIVOT_FLOOR = 1e-30


def thomas_solve(const double[::1] diag, const double[::1] off, const double[::1] rhs):
    """Solve a symmetric tridiagonal system by forward elimination / back substitution."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double pivot
    if off.shape[0] != (n - 1 if n > 0 else 0) or rhs.shape[0] != n:
        raise ValueError("inconsistent tridiagonal system sizes")
    out = np.empty(n)
    cdef double[::1] x = out
    if n == 0:
        return out
    cp_arr = np.empty(n)
    cdef double[::1] cp = cp_arr

    pivot = diag[0]
    if pivot > -PIVOT_FLOOR and pivot < PIVOT_FLOOR:
        raise SingularMatrixError(f"pivot 0 has magnitude {abs(pivot):.3g}")
    x[0] = rhs[0] / pivot
    if n > 1:
        cp[0] = off[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - off[i - 1] * cp[i - 1]
        if pivot > -PIVOT_FLOOR and pivot < PIVOT_FLOOR:
            raise SingularMatrixError(f"pivot {i} has magnitude {abs(pivot):.3g}")
        if i < n - 1:
            cp[i] = off[i] / pivot
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / pivot
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return out


def dp_partition(const double[::1] w, const double[::1] x, int n):
    """Optimal split of weighted sorted atoms into ``n`` contiguous groups.

    Minimises the total within-group weighted squared deviation.  Returns the
    ``n + 1`` group boundaries as atom indices (0 = b_0 < ... < b_n = len(x)).
    """
    cdef Py_ssize_t G = w.shape[0]
    cdef Py_ssize_t i, j, k, best_i
    cdef double c0, c1, c2, cost, cand, best, mean, total
    if x.shape[0] != G:
        raise ValueError("weights and positions differ in length")
    if n < 1 or n > G:
        raise ValueError("need 1 <= n <= number of atoms")

    total = 0.0
    mean = 0.0
    for i in range(G):
        total += w[i]
        mean += w[i] * x[i]
    mean /= total

    s0_arr = np.zeros(G + 1)
    s1_arr = np.zeros(G + 1)
    s2_arr = np.zeros(G + 1)
    cdef double[::1] s0 = s0_arr
    cdef double[::1] s1 = s1_arr
    cdef double[::1] s2 = s2_arr
    cdef double y
    for i in range(G):
        y = x[i] - mean
        s0[i + 1] = s0[i] + w[i]
        s1[i + 1] = s1[i] + w[i] * y
        s2[i + 1] = s2[i] + w[i] * y * y

    prev_arr = np.empty(G + 1)
    curr_arr = np.empty(G + 1)
    back_arr = np.zeros((n + 1, G + 1), dtype=np.intp)
    cdef double[::1] prev = prev_arr
    cdef double[::1] curr = curr_arr
    cdef Py_ssize_t[:, ::1] back = back_arr

    for j in range(G + 1):
        c0 = s0[j]
        c1 = s1[j]
        c2 = s2[j]
        prev[j] = c2 - c1 * c1 / c0 if c0 > 0 else 0.0
    for k in range(2, n + 1):
        for j in range(G + 1):
            curr[j] = INFINITY
        for j in range(k, G + 1):
            best = INFINITY
            best_i = k - 1
            for i in range(k - 1, j):
                c0 = s0[j] - s0[i]
                c1 = s1[j] - s1[i]
                c2 = s2[j] - s2[i]
                cost = c2 - c1 * c1 / c0 if c0 > 0 else 0.0
                cand = prev[i] + cost
                if cand < best:
                    best = cand
                    best_i = i
            curr[j] = best
            back[k, j] = best_i
        for j in range(G + 1):
            prev[j] = curr[j]

    bounds = np.empty(n + 1, dtype=np.intp)
    bounds[n] = G
    for k in range(n, 1, -1):
        bounds[k - 1] = back[k, bounds[k]]
    bounds[0] = 0
    return bounds
