"""Square-root principal component pursuit via alternating minimization.

Decomposes an observation matrix into low-rank plus sparse parts by solving
``min ||L||_* + lam * ||S||_1 + mu * ||L + S - D||_F`` with exact closed-form
subproblem solutions, optionally accelerated with a certified truncated-SVD
L-update.
"""

from ._backend import backend_name
from .bm import RankCertificate, acc_update_L, lift_to_factors, rank_certificate, solve_uv
from .data import SyntheticInstance, gen_synthetic, load_matrix, recovery_errors, save_matrix
from .linalg import (
    PartialSvd,
    StackedPair,
    SvdError,
    SvdResult,
    norm_diamond,
    norm_diamond_dual,
    norm_fro,
    norm_l1,
    norm_linf,
    norm_nuclear,
    norm_spectral,
    svd_full,
    svd_partial,
)
from .prox import CanonicalForm, ProxCase, canonicalize, prox_sqrt_l1, solve_canonical, update_S
from .solver import (
    OverfitError,
    Problem,
    SolveResult,
    SolverConfig,
    TerminationReason,
    acc_alt_min,
    alt_min,
    kkt_residual,
    objective,
    prox_l1,
    prox_nuclear_unit,
)
from .spectral import ShrinkResult, d_rho, update_L_full

__version__ = "0.1.0"
