"""Alternating minimization loops, stopping logic, and per-iteration telemetry.

Both loops alternate the exact S-update and the exact L-update starting from
zero matrices. Because each iterate solves its subproblem exactly, the
nuclear-prox fixed-point equation holds at every post-L-step iterate, so the
stopping residual only needs the (cheap) l1-prox part; an optional verify mode
recomputes the nuclear part explicitly for test builds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import linalg
from .bm import _acc_update_L_detail
from .prox import update_S
from .spectral import _update_L_full_detail, rho_from_mu

__all__ = [
    "OverfitError",
    "TerminationReason",
    "Problem",
    "SolverConfig",
    "SolveResult",
    "objective",
    "prox_l1",
    "prox_nuclear_unit",
    "kkt_residual",
    "alt_min",
    "acc_alt_min",
]

_OVERFIT_REL = 1e-13


class OverfitError(RuntimeError):
    """The data-fit residual vanished; the stopping residual is undefined."""


class TerminationReason(str, Enum):
    TOLERANCE = "tolerance"
    MAX_ITER = "max_iter"
    TIMEOUT = "timeout"
    OVERFIT = "overfit"


@dataclass(frozen=True)
class Problem:
    """One problem instance: data matrix and the two penalty weights."""

    D: np.ndarray
    lam: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "D", linalg.as_matrix(self.D, "D"))
        if not (self.lam > 0 and self.mu > 0):
            raise ValueError("lam and mu must be positive")

    @classmethod
    def with_default_penalties(cls, D) -> "Problem":
        """Tuning-free weights ``lam = 1/sqrt(n1)``, ``mu = sqrt(n2/2)``."""
        D = linalg.as_matrix(D, "D")
        n1, n2 = D.shape
        return cls(D, 1.0 / np.sqrt(n1), np.sqrt(n2 / 2.0))


@dataclass
class SolverConfig:
    tolerance: float = 1e-6
    max_iterations: int = 5000
    max_wall_time: Optional[float] = None  # seconds
    mode: str = "plain"  # "plain" | "accelerated"
    initial_rank: int = 10
    delta_k: int = 1
    residual_check_period: int = 1
    verify_l_step: bool = False  # recompute the nuclear-prox residual per step
    progress: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1 or self.residual_check_period < 1:
            raise ValueError("iteration counts and periods must be >= 1")
        if self.mode not in ("plain", "accelerated"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class SolveResult:
    L_hat: np.ndarray
    S_hat: np.ndarray
    iterations: int
    objective_history: np.ndarray
    residual_history: np.ndarray
    rank_history: np.ndarray
    termination_reason: TerminationReason
    delta1_history: Optional[np.ndarray] = field(default=None)

    @property
    def final_residual(self) -> float:
        return float(self.residual_history[-1]) if self.residual_history.size else np.nan


def objective(L, S, problem: Problem) -> float:
    """``||L||_* + lam * ||S||_1 + mu * ||L + S - D||_F``."""
    L = np.asarray(L, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if L.shape != problem.D.shape or S.shape != problem.D.shape:
        raise ValueError("L and S must match the shape of D")
    return (
        linalg.norm_nuclear(L)
        + problem.lam * linalg.norm_l1(S)
        + problem.mu * linalg.norm_fro(L + S - problem.D)
    )


def prox_l1(Z, lam) -> np.ndarray:
    """Elementwise soft threshold ``sign(z) * max(|z| - lam, 0)``."""
    Z = np.asarray(Z, dtype=np.float64)
    return np.sign(Z) * np.maximum(np.abs(Z) - lam, 0.0)


def prox_nuclear_unit(Z) -> np.ndarray:
    """Singular-value soft threshold at 1: ``U diag(max(s - 1, 0)) V.T``."""
    res = linalg.svd_full(Z)
    d = np.maximum(res.s - 1.0, 0.0)
    r = int(np.count_nonzero(d))
    if r == 0:
        return np.zeros_like(np.asarray(Z, dtype=np.float64))
    return (res.U[:, :r] * d[:r]) @ res.V[:, :r].T


def kkt_residual(L, S, problem: Problem) -> float:
    """Relative residual of the two prox fixed-point equations at ``(L, S)``.

    Raises ``OverfitError`` when ``||L + S - D||_F`` is numerically zero
    relative to ``||D||_F`` (the gradient of the square-root loss is then
    undefined).
    """
    L = np.asarray(L, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    D, lam, mu = problem.D, problem.lam, problem.mu
    R = L + S - D
    nr = float(np.linalg.norm(R))
    if nr <= _OVERFIT_REL * float(np.linalg.norm(D)):
        raise OverfitError("data-fit residual is numerically zero")
    G = (mu / nr) * R
    d1 = float(np.linalg.norm(L - prox_nuclear_unit(L - G)))
    d2 = float(np.linalg.norm(S - prox_l1(S - G, lam)))
    return (d1 + d2) / (1.0 + float(np.linalg.norm(L)) + float(np.linalg.norm(S)))


def alt_min(problem: Problem, config: Optional[SolverConfig] = None) -> SolveResult:
    """Plain alternating minimization with the full-SVD L-update."""
    config = config or SolverConfig()
    rho = rho_from_mu(problem.mu)

    def l_step(A, _state):
        L, shrink, _ = _update_L_full_detail(A, rho)
        return L, shrink.active_rank, float(np.sum(shrink.values)), None

    return _run(problem, config, l_step)


def acc_alt_min(problem: Problem, config: Optional[SolverConfig] = None) -> SolveResult:
    """Accelerated loop: truncated-SVD L-update with warm-started rank."""
    config = config or SolverConfig(mode="accelerated")
    rho = rho_from_mu(problem.mu)
    delta_k = config.delta_k

    def l_step(A, state):
        k = state if state is not None else config.initial_rank
        L, rank, d = _acc_update_L_detail(A, rho, k, delta_k)
        # warm start: next call reuses the certified rank
        return L, rank, float(np.sum(d)), rank

    return _run(problem, config, l_step)


def _run(problem: Problem, config: SolverConfig, l_step) -> SolveResult:
    D, lam, mu = problem.D, problem.lam, problem.mu
    norm_D = float(np.linalg.norm(D))
    t_start = time.monotonic()

    L = np.zeros_like(D)
    S = np.zeros_like(D)
    obj_hist = [mu * norm_D]  # objective at the zero initial point
    resid_hist: list[float] = []
    rank_hist = [0]
    delta1_hist: list[float] = []
    reason = TerminationReason.MAX_ITER
    iterations = 0
    warm_state = None

    for i in range(config.max_iterations):
        S = update_S(L, D, lam, mu)
        A = D - S
        L, rank, nuclear, warm_state = l_step(A, warm_state)
        iterations = i + 1

        obj_hist.append(
            nuclear + lam * float(np.sum(np.abs(S))) + mu * float(np.linalg.norm(L - A))
        )
        rank_hist.append(rank)
        if config.progress is not None:
            config.progress(iterations, L, S)

        if iterations % config.residual_check_period == 0 or iterations == config.max_iterations:
            R = L + S - D
            nr = float(np.linalg.norm(R))
            if nr <= _OVERFIT_REL * norm_D:
                if norm_D == 0.0:
                    resid_hist.append(0.0)
                    reason = TerminationReason.TOLERANCE
                else:
                    resid_hist.append(np.nan)
                    reason = TerminationReason.OVERFIT
                break
            G = (mu / nr) * R
            d2 = float(np.linalg.norm(S - prox_l1(S - G, lam)))
            d1 = 0.0  # exact after the L-step (nuclear prox fixed point)
            if config.verify_l_step:
                d1 = float(np.linalg.norm(L - prox_nuclear_unit(L - G)))
                delta1_hist.append(d1)
            eta = (d1 + d2) / (1.0 + float(np.linalg.norm(L)) + float(np.linalg.norm(S)))
            resid_hist.append(eta)
            if eta < config.tolerance:
                reason = TerminationReason.TOLERANCE
                break

        if (
            config.max_wall_time is not None
            and time.monotonic() - t_start > config.max_wall_time
        ):
            reason = TerminationReason.TIMEOUT
            break

    return SolveResult(
        L_hat=L,
        S_hat=S,
        iterations=iterations,
        objective_history=np.asarray(obj_hist),
        residual_history=np.asarray(resid_hist),
        rank_history=np.asarray(rank_hist, dtype=np.int64),
        termination_reason=reason,
        delta1_history=np.asarray(delta1_hist) if config.verify_l_step else None,
    )
