"""Exact solver for ``min_L ||L - A||_F + rho * ||L||_*``.

The optimum shares singular subspaces with ``A``; its singular values are the
case-wise shrink of ``A``'s, computed by the same canonical kernel as the
vector subproblem.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import linalg
from ._backend import kernels

__all__ = ["ShrinkResult", "d_rho", "update_L_full", "rho_from_mu"]


class ShrinkResult(NamedTuple):
    """Shrunk singular values and the count of strictly positive ones."""

    values: np.ndarray
    active_rank: int


def rho_from_mu(mu) -> float:
    """The single source of the ``update-L <-> op:L`` reparameterization."""
    mu = float(mu)
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return 1.0 / mu


def d_rho(sigma, rho) -> ShrinkResult:
    """Case-wise shrink of a nonincreasing nonnegative vector."""
    sigma = np.ascontiguousarray(sigma, dtype=np.float64)
    rho = float(rho)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if sigma.ndim != 1 or sigma.size == 0:
        raise ValueError("sigma must be a nonempty vector")
    if sigma[-1] < 0 or np.any(np.diff(sigma) > 0):
        raise ValueError("sigma must be nonnegative and sorted nonincreasing")
    if sigma[0] == 0.0:
        return ShrinkResult(np.zeros_like(sigma), 0)
    values, _, k, _ = kernels.canonical_solve(sigma, rho)
    return ShrinkResult(values, int(k))


def update_L_full(A, rho):
    """Optimal solution of ``min_L ||L - A||_F + rho * ||L||_*`` and its rank."""
    L, shrink, _ = _update_L_full_detail(A, rho)
    return L, shrink.active_rank


def _update_L_full_detail(A, rho):
    """As ``update_L_full`` but also returns the shrink and the SVD."""
    A = linalg.as_matrix(A, "A")
    if not A.any():
        return np.zeros_like(A), ShrinkResult(np.zeros(min(A.shape)), 0), None
    res = linalg.svd_full(A)
    sigma = res.s.copy()
    # snap numerically-zero singular values so rank counts match the
    # exact-arithmetic spectrum (and the accelerated route)
    sigma[sigma <= 1e-12 * sigma[0]] = 0.0
    if sigma[0] == 0.0:
        return np.zeros_like(A), ShrinkResult(np.zeros(min(A.shape)), 0), res
    shrink = d_rho(sigma, rho)
    r = shrink.active_rank
    L = (res.U[:, :r] * shrink.values[:r]) @ res.V[:, :r].T
    if r == 0:
        L = np.zeros_like(A)
    return L, shrink, res
