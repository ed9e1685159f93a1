# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled shrink kernel: the inner loop of the sorted l2+l1 subproblem.

Keep in lockstep with ``srpcp._kernels_py``; the two must return
bitwise-identical results (same accumulation order, no FP contraction).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

BACKEND = "cython"

CASE_ZERO = 0
CASE_IDENTITY = 1
CASE_SHRINK = 2

cdef double _REL_EPS = 1e-12


def canonical_solve(double[::1] b, double tau):
    """Minimize ``||s - b||_2 + tau * sum(s)`` over ``s >= 0``.

    Same contract as ``srpcp._kernels_py.canonical_solve``.
    """
    cdef Py_ssize_t n = b.shape[0]
    cdef cnp.ndarray suffix_arr = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] suffix = suffix_arr
    cdef Py_ssize_t i, k, kbar, m, nhit, first_cross
    cdef double acc = 0.0
    cdef double l2, inv2, t, tk, num
    cdef int r = 0

    suffix[n] = 0.0
    for i in range(n - 1, -1, -1):
        acc = acc + b[i] * b[i]
        suffix[i] = acc
        if b[i] > 0.0:
            r += 1
    l2 = sqrt(suffix[0])

    cdef cnp.ndarray s_arr
    cdef double[::1] s
    if tau * l2 >= b[0]:
        return np.zeros(n), CASE_ZERO, 0, 0.0
    if tau * sqrt(<double> r) <= 1.0:
        return np.asarray(b).copy(), CASE_IDENTITY, r, 0.0

    inv2 = 1.0 / (tau * tau)
    m = <Py_ssize_t> floor(inv2)
    if m * (tau * tau) >= 1.0 - _REL_EPS:
        kbar = m - 1
    else:
        kbar = m
    if kbar > r - 1:
        kbar = r - 1
    if kbar < 1:
        raise RuntimeError("empty shrink range; inconsistent case dispatch")

    nhit = 0
    k = 0
    tk = 0.0
    first_cross = 0
    for i in range(1, kbar + 1):
        t = sqrt(suffix[i] / (inv2 - <double> i))
        if b[i] <= t and t < b[i - 1]:
            nhit += 1
            if nhit == 1:
                k = i
                tk = t
        if first_cross == 0 and b[i] <= t * (1.0 + _REL_EPS):
            first_cross = i
    if nhit == 0:
        # FP tie on the boundary: first crossing is the k the uniqueness
        # argument constructs
        k = first_cross if first_cross > 0 else kbar
        tk = sqrt(suffix[k] / (inv2 - <double> k))
    elif nhit > 1:
        raise RuntimeError(f"shrink index not unique: {nhit} candidates")

    s_arr = np.zeros(n, dtype=np.float64)
    s = s_arr
    for i in range(k):
        s[i] = b[i] - tk
    return s_arr, CASE_SHRINK, k, tk
