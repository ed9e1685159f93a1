"""Accelerated L-update via low-rank factorization and truncated SVD.

The factorized subproblem ``min ||U V' - A||_F + (rho/2)(||U||_F^2 + ||V||_F^2)``
reduces, on the singular values, to a k-dimensional problem with the tail
energy lumped into a single scalar ``c``. Its closed-form solution matches the
full shrink whenever the rank guess was large enough, which is certified by a
single inequality on the next singular value; otherwise the guess grows.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import linalg
from .prox import solve_canonical

__all__ = [
    "RankCertificate",
    "solve_uv",
    "rank_certificate",
    "lift_to_factors",
    "acc_update_L",
]

_REL_EPS = 1e-12

# extra triplets fetched per truncated decomposition so the certificate's
# growth loop can advance without recomputing the subspace
_GROWTH_HEADROOM = 12


class RankCertificate(NamedTuple):
    """Outcome of the rank-validity check for a reduced solution.

    ``ok`` means the reduced solution, padded with zeros, solves the
    full-spectrum shrink problem, i.e. the rank guess was sufficient.
    """

    ell: int
    sigma_next: float
    threshold: float
    ok: bool


def _validate_w(w):
    w = np.ascontiguousarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("w must be a nonempty vector")
    if not np.all(np.isfinite(w)):
        raise ValueError("w contains non-finite entries")
    if w[-1] < 0 or np.any(np.diff(w) > 0):
        raise ValueError("w must be nonnegative and sorted nonincreasing")
    if w[0] == 0.0:
        raise ValueError("w must be nonzero")
    return w


def solve_uv(w, c, rho) -> np.ndarray:
    """Minimize ``sqrt(||s - w||^2 + c^2) + rho * sum(s)`` over ``s >= 0``.

    ``w`` must be sorted nonincreasing and nonnegative with ``w != 0``;
    ``c >= 0`` is the lumped tail energy. For ``c == 0`` this coincides with
    ``solve_canonical(w, rho)``.
    """
    w = _validate_w(w)
    c = float(c)
    rho = float(rho)
    if c < 0:
        raise ValueError(f"c must be nonnegative, got {c}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if c == 0.0:
        return solve_canonical(w, rho)

    k = w.size
    ell = int(np.count_nonzero(w > 0.0))
    ws = w[:ell]  # trailing zeros stay zero in the solution

    c2 = c * c
    thr_hi = ws[0] / np.sqrt(float(ws @ ws) + c2)
    thr_lo = ws[-1] / np.sqrt(ell * ws[-1] * ws[-1] + c2)
    if thr_lo > thr_hi * (1.0 + _REL_EPS):
        raise AssertionError("threshold ordering violated; unsorted input?")

    d = np.zeros(k)
    if rho >= thr_hi:
        return d
    if rho <= thr_lo:
        shift = rho * np.sqrt(c2 / (1.0 - ell * rho * rho))
        d[:ell] = np.maximum(ws - shift, 0.0)
        return d

    # middle regime: unique index i with w_{i+1} <= t_i < w_i
    inv2 = 1.0 / (rho * rho)
    suffix = np.empty(ell + 1)
    suffix[ell] = c2
    suffix[:ell] = np.cumsum((ws * ws)[::-1])[::-1] + c2
    i_star = 0
    t_star = 0.0
    nhit = 0
    first_cross = 0
    for i in range(1, ell):
        if inv2 - i <= 0.0:
            break
        t = np.sqrt(suffix[i] / (inv2 - i))
        if ws[i] <= t < ws[i - 1]:
            nhit += 1
            if nhit == 1:
                i_star, t_star = i, t
        if first_cross == 0 and ws[i] <= t * (1.0 + _REL_EPS):
            first_cross = i
    if nhit > 1:
        raise RuntimeError(f"shrink index not unique: {nhit} candidates")
    if nhit == 0:
        # FP tie on the boundary: first crossing is the constructed index
        i_star = first_cross if first_cross > 0 else ell - 1
        t_star = np.sqrt(suffix[i_star] / (inv2 - i_star))
    d[:i_star] = ws[:i_star] - t_star
    return d


def rank_certificate(ell, sigma_next, c, rho) -> RankCertificate:
    """Check ``rho >= sigma_next / sqrt(ell * sigma_next^2 + c^2)``."""
    ell = int(ell)
    sigma_next = float(sigma_next)
    c = float(c)
    rho = float(rho)
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    if sigma_next < 0 or c < 0 or not rho > 0:
        raise ValueError("need sigma_next >= 0, c >= 0, rho > 0")
    if sigma_next == 0.0:
        return RankCertificate(ell, 0.0, 0.0, True)
    threshold = sigma_next / np.sqrt(ell * sigma_next * sigma_next + c * c)
    return RankCertificate(ell, sigma_next, float(threshold), bool(rho >= threshold))


def lift_to_factors(H, W, d):
    """Factors ``U = H diag(sqrt(d))``, ``V = W diag(sqrt(d))`` so that
    ``U @ V.T`` has singular values ``d`` and ``||U||_F^2 = ||V||_F^2 = sum(d)``.
    """
    H = np.asarray(H, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 1 or H.ndim != 2 or W.ndim != 2:
        raise ValueError("H, W must be matrices and d a vector")
    if H.shape[1] != d.size or W.shape[1] != d.size:
        raise ValueError(
            f"shape mismatch: H {H.shape}, W {W.shape}, d length {d.size}"
        )
    if np.any(d < 0):
        raise ValueError("d must be nonnegative")
    root = np.sqrt(d)
    return H * root, W * root


def acc_update_L(A, rho, k, delta_k=1):
    """Accelerated solve of ``min_L ||L - A||_F + rho * ||L||_*``.

    Grows the rank estimate ``k`` by ``delta_k`` until the certificate
    validates it, computing only a truncated SVD per trial. Returns the same
    optimum as ``update_L_full`` along with its rank.
    """
    L, rank, _ = _acc_update_L_detail(A, rho, k, delta_k)
    return L, rank


def _acc_update_L_detail(A, rho, k, delta_k=1):
    """As ``acc_update_L`` but also returns the shrunk singular values."""
    A = linalg.as_matrix(A, "A")
    rho = float(rho)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    k = max(int(k), 0)
    delta_k = int(delta_k)
    if delta_k < 1:
        raise ValueError(f"delta_k must be >= 1, got {delta_k}")
    if not A.any():
        return np.zeros_like(A), 0, np.zeros(0)

    p = min(A.shape)
    normF2 = float(np.sum(A * A))
    # the growth loop reuses one decomposition across trials: a truncated one
    # with headroom while that is viable, the exact one afterwards
    cache = None
    cache_exact = False
    fresh_calls = 0
    while True:
        k = min(k + delta_k, p)
        kk = min(k + 1, p)
        if cache is None or (not cache_exact and cache.s.size < kk):
            fresh_calls += 1
            kk_req = min(kk + _GROWTH_HEADROOM, p)
            # after several failed truncated trials one exact decomposition
            # is cheaper than another batch of them
            if fresh_calls <= 4 and linalg.lanczos_viable(p, kk_req):
                cache = linalg.svd_partial(A, kk_req)
                cache_exact = False
                if not cache.converged:
                    cache = None
            else:
                cache = None
            if cache is None:
                full = linalg.svd_full(A)
                cache = linalg.PartialSvd(full.U, full.s, full.V, True)
                cache_exact = True
        psvd = linalg.PartialSvd(
            cache.U[:, :kk], cache.s[:kk], cache.V[:, :kk], True
        )
        sig = psvd.s
        # snap numerically-zero singular values to exact zeros so the support
        # count and the certificate see the exact-arithmetic spectrum
        ztol = 1e-12 * sig[0]
        w = sig[:k].copy()
        w[w <= ztol] = 0.0
        c = float(np.sqrt(max(normF2 - float(w @ w), 0.0)))
        if c <= np.sqrt(p * np.finfo(float).eps * normF2):
            c = 0.0  # tail energy below the cancellation floor
        d = solve_uv(w, c, rho)
        ell = int(np.count_nonzero(w > 0.0))
        sigma_next = float(sig[ell]) if ell < sig.size else 0.0
        if sigma_next <= ztol:
            sigma_next = 0.0
        cert = rank_certificate(max(ell, 1), sigma_next, c, rho)
        if cert.ok or k >= p:
            break

    r = int(np.count_nonzero(d > 0.0))
    if r == 0:
        return np.zeros_like(A), 0, d[:0]
    L = (psvd.U[:, :r] * d[:r]) @ psvd.V[:, :r].T
    return L, r, d[:r]
