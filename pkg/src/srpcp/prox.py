"""Closed-form solver for ``min_s ||s - a||_2 + tau * ||s||_1``.

The solution is computed by reducing to the canonical problem (nonnegative,
sorted nonincreasing data), which splits into three regimes:

* ``tau >= ||a||_inf / ||a||_2``: the zero vector is optimal,
* ``tau <= 1 / sqrt(||a||_0)``: ``a`` itself is optimal,
* otherwise a soft threshold ``max(a - t_k, 0)`` where ``t_k`` is found by a
  single linear scan over tail-accumulated suffix sums.

Regime boundaries use the closed-form endpoints (non-strict tests), so ties
resolve deterministically; at ``tau == 1/sqrt(||a||_0)`` the returned member
of the solution family is ``a`` itself.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._backend import kernels

__all__ = [
    "CASE_ZERO",
    "CASE_IDENTITY",
    "CASE_SHRINK",
    "CanonicalForm",
    "ProxCase",
    "canonicalize",
    "solve_canonical",
    "prox_case",
    "prox_sqrt_l1",
    "update_S",
]

CASE_ZERO = kernels.CASE_ZERO
CASE_IDENTITY = kernels.CASE_IDENTITY
CASE_SHRINK = kernels.CASE_SHRINK

_CASE_NAMES = {CASE_ZERO: "zero", CASE_IDENTITY: "identity", CASE_SHRINK: "shrink"}


class CanonicalForm(NamedTuple):
    """Sign/permutation reduction of a vector to sorted nonnegative form.

    ``sorted_abs[permutation[i]] == abs(a[i])`` for the original vector ``a``.
    """

    sorted_abs: np.ndarray
    signs: np.ndarray
    permutation: np.ndarray

    def restore(self, s_sorted):
        """Map a solution of the canonical problem back to the original order."""
        return self.signs * s_sorted[self.permutation]


class ProxCase(NamedTuple):
    """Which closed-form regime applied: tag in {"zero", "identity", "shrink"}.

    For the shrink case, ``k`` is the unique active index count and ``t`` the
    threshold; for the identity case ``k`` is the support size of ``a``.
    """

    tag: str
    k: int
    t: float


def _as_vector(a, name="a"):
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1:
        v = v.ravel()
    if v.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def _check_tau(tau):
    tau = float(tau)
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return tau


def canonicalize(a) -> CanonicalForm:
    """Stable sign/permutation reduction; ties keep original relative order."""
    v = _as_vector(a)
    sabs = np.abs(v)
    order = np.argsort(-sabs, kind="stable")
    perm = np.empty_like(order)
    perm[order] = np.arange(order.size)
    return CanonicalForm(sabs[order], np.sign(v), perm)


def _validate_canonical(a):
    b = _as_vector(a)
    if b[-1] < 0 or np.any(np.diff(b) > 0):
        raise ValueError("input must be nonnegative and sorted nonincreasing")
    if b[0] == 0.0:
        raise ValueError("input must be nonzero")
    return b


def solve_canonical(a, tau) -> np.ndarray:
    """Optimal solution of the canonical problem; see module docstring."""
    b = _validate_canonical(a)
    s, _, _, _ = kernels.canonical_solve(b, _check_tau(tau))
    return s


def prox_case(a, tau) -> ProxCase:
    """Classify the regime the canonical solver takes on ``(a, tau)``."""
    b = _validate_canonical(a)
    _, case, k, t = kernels.canonical_solve(b, _check_tau(tau))
    return ProxCase(_CASE_NAMES[case], int(k), float(t))


def prox_sqrt_l1(a, tau) -> np.ndarray:
    """Optimal solution of ``min_s ||s - a||_2 + tau * ||s||_1`` for real ``a``."""
    v = _as_vector(a)
    tau = _check_tau(tau)
    if not v.any():
        return np.zeros_like(v)
    form = canonicalize(v)
    s, _, _, _ = kernels.canonical_solve(form.sorted_abs, tau)
    return form.restore(s)


def update_S(L, D, lam, mu) -> np.ndarray:
    """Exact minimizer of ``lam * ||S||_1 + mu * ||L + S - D||_F`` over S."""
    L = np.asarray(L, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if L.shape != D.shape:
        raise ValueError(f"shape mismatch: L {L.shape} vs D {D.shape}")
    lam = float(lam)
    mu = float(mu)
    if not (lam > 0 and mu > 0):
        raise ValueError("lam and mu must be positive")
    return prox_sqrt_l1((D - L).ravel(), lam / mu).reshape(D.shape)
