"""Pure-numpy fallback for the sorted shrink kernel.

Mirrors ``srpcp._kernels`` (the Cython extension) operation for operation,
including the accumulation order of the tail suffix sums, so both backends
produce bitwise-identical results on the same input.
"""

import numpy as np

BACKEND = "python"

CASE_ZERO = 0
CASE_IDENTITY = 1
CASE_SHRINK = 2

_REL_EPS = 1e-12


def canonical_solve(b, tau):
    """Minimize ``||s - b||_2 + tau * sum(s)`` over ``s >= 0``.

    ``b`` must be a contiguous float64 vector sorted nonincreasing with
    ``b[0] > 0``. Returns ``(s, case, k, t)``: the minimizer, the dispatch
    case, the active count ``k`` (number of positive entries of ``b`` in the
    identity case, 0 in the zero case) and the shrink threshold ``t`` (0.0
    unless shrinking).
    """
    n = b.shape[0]
    suffix = np.empty(n + 1)
    suffix[n] = 0.0
    suffix[:n] = np.cumsum((b * b)[::-1])[::-1]  # accumulated from the tail
    l2 = np.sqrt(suffix[0])
    r = int(np.count_nonzero(b > 0.0))

    if tau * l2 >= b[0]:
        return np.zeros(n), CASE_ZERO, 0, 0.0
    if tau * np.sqrt(float(r)) <= 1.0:
        return b.copy(), CASE_IDENTITY, r, 0.0

    inv2 = 1.0 / (tau * tau)
    m = int(np.floor(inv2))
    # largest integer strictly below 1/tau^2, guarded against 1/tau^2
    # rounding onto an integer
    kbar = m - 1 if m * (tau * tau) >= 1.0 - _REL_EPS else m
    kbar = min(kbar, r - 1)
    if kbar < 1:
        raise RuntimeError("empty shrink range; inconsistent case dispatch")

    ks = np.arange(1, kbar + 1)
    t = np.sqrt(suffix[ks] / (inv2 - ks))
    hit = (b[ks] <= t) & (t < b[ks - 1])
    nhit = int(np.count_nonzero(hit))
    if nhit == 1:
        k = int(ks[hit][0])
        tk = float(t[k - 1])
    elif nhit == 0:
        # FP tie on the boundary: take the first crossing, which is the k the
        # uniqueness argument constructs
        cross = b[ks] <= t * (1.0 + _REL_EPS)
        k = int(ks[np.argmax(cross)]) if bool(cross.any()) else kbar
        tk = float(np.sqrt(suffix[k] / (inv2 - k)))
    else:
        raise RuntimeError(f"shrink index not unique: {nhit} candidates")

    s = np.zeros(n)
    np.subtract(b[:k], tk, out=s[:k])
    return s, CASE_SHRINK, k, tk
