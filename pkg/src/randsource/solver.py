"""Tikhonov regularization of the covariance problem with Sobolev penalty.

Solves ``argmin_q 1/2 ||T q - C_obs||_HS^2 + alpha/2 ||q||_{H^m}^2`` via
conjugate gradients on the normal equations

    (T*T + alpha B_m) q = T* C_obs,

preconditioned by ``B_m^{-1}``.  The quadrature weight is a constant, so
conjugate gradients in the weighted inner product coincides with plain
CG; iterates stay real because ``T*`` of a Hermitian matrix is real and
``B_m`` preserves real fields.

``discrepancy_sweep`` lowers alpha geometrically with warm starts until
the residual drops below ``tau * delta``.  During the sweep the residual
is evaluated through the expansion

    ||T q - C_obs||^2 = <q, T*T q>_w - 2 <q, T* C_obs>_w + ||C_obs||^2,

which needs no extra large matrix products; the final reported residual
is recomputed exactly as ``hs_dist(forward_cov(q), C_obs)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .domain import SourceField, apply_multiplier, sobolev_apply, sobolev_norm
from .operators import CovMatrix, PotentialMatrix, adjoint_cov, forward_cov, hs_dist, hs_norm

__all__ = ["TikhonovConfig", "ReconResult", "tikhonov_solve", "discrepancy_sweep", "recon_error"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TikhonovConfig:
    """Penalty index, parameter-choice rule, and CG tolerances."""

    m: float = 1.0
    alpha0: float | None = None  # None: auto from the scale of T
    ratio: float = 2.0
    tau: float = 1.5
    cg_tol: float = 1e-8
    cg_maxit: int = 2000
    alpha_min: float = 1e-14

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("penalty smoothness m must be >= 0")
        if self.ratio <= 1:
            raise ValueError("ratio must be > 1")
        if self.tau <= 1:
            raise ValueError("tau must be > 1")
        if not 0 < self.cg_tol < 1:
            raise ValueError("cg_tol must lie in (0, 1)")


@dataclass
class ReconResult:
    """Reconstruction with the regularization parameter that produced it."""

    q_alpha: SourceField
    alpha_final: float
    residual: float
    iterations: list[int] = field(default_factory=list)
    discrepancy_satisfied: bool = True


def _normal_op(P: PotentialMatrix, kernel: np.ndarray | None) -> Callable[[np.ndarray], np.ndarray]:
    """Application of T*T on flat real fields, matrix-free or via a
    precomputed dense kernel."""
    if kernel is not None:
        return lambda v: kernel @ v

    def apply_tt(v: np.ndarray) -> np.ndarray:
        return adjoint_cov(P, forward_cov(P, SourceField(P.grid, v))).values

    return apply_tt


def _pcg(
    apply_op: Callable[[np.ndarray], np.ndarray],
    precond: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    x0: np.ndarray,
    tol: float,
    maxit: int,
) -> tuple[np.ndarray, int, bool]:
    """Preconditioned CG for an SPD system; returns (x, iterations, converged)."""
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b), 0, True
    x = x0.copy()
    r = b - apply_op(x)
    z = precond(r)
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, maxit + 1):
        ap = apply_op(p)
        denom = float(p @ ap)
        if denom <= 0.0:
            # numerical breakdown of positive definiteness; current x is best
            logger.warning("CG breakdown: curvature %.3e at iteration %d", denom, it)
            return x, it, False
        step = rz / denom
        x += step * p
        r -= step * ap
        if not np.all(np.isfinite(r)):
            raise FloatingPointError(f"CG produced non-finite residual at iteration {it}")
        if np.linalg.norm(r) <= tol * b_norm:
            return x, it, True
        z = precond(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    logger.warning("CG reached maxit=%d without convergence (rel res %.3e)", maxit, np.linalg.norm(r) / b_norm)
    return x, maxit, False


def tikhonov_solve(
    P: PotentialMatrix,
    C_obs: CovMatrix,
    alpha: float,
    m: float,
    warm_start: SourceField | None = None,
    cfg: TikhonovConfig | None = None,
    kernel: np.ndarray | None = None,
    rhs: np.ndarray | None = None,
) -> SourceField:
    """Minimizer of the Tikhonov functional at fixed alpha.

    ``kernel`` optionally supplies the dense T*T matrix; ``rhs``
    optionally supplies a precomputed ``T* C_obs`` (flat values).
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    cfg = cfg if cfg is not None else TikhonovConfig(m=m)
    grid = P.grid
    if rhs is None:
        rhs = adjoint_cov(P, C_obs).values
    tt = _normal_op(P, kernel)

    def apply_full(v: np.ndarray) -> np.ndarray:
        return tt(v) + alpha * sobolev_apply(SourceField(grid, v), m).values

    if m == 0:
        precond = lambda r: r  # noqa: E731
    else:
        precond = lambda r: apply_multiplier(SourceField(grid, r), -m).values  # noqa: E731

    x0 = warm_start.values if warm_start is not None else np.zeros(grid.size)
    x, _, _ = _pcg(apply_full, precond, rhs, x0, cfg.cg_tol, cfg.cg_maxit)
    return SourceField(grid, x)


def _default_alpha0(P: PotentialMatrix, m: float, tt: Callable[[np.ndarray], np.ndarray]) -> float:
    """Scale-aware starting parameter: ||T 1||^2 / ||1||^2_{H^m}.

    Makes the alpha-penalty dominate T*T at the first stage, so the sweep
    starts over-regularized and the first residual sits near ||C_obs||.
    """
    ones = np.ones(P.grid.size)
    t1_sq = P.grid.weight * float(ones @ tt(ones))  # ||T 1||_HS^2
    ones_norm_sq = sobolev_norm(SourceField(P.grid, ones), m) ** 2
    return t1_sq / ones_norm_sq


def discrepancy_sweep(
    P: PotentialMatrix,
    C_obs: CovMatrix,
    delta: float,
    cfg: TikhonovConfig,
    kernel: np.ndarray | None = None,
    rhs: np.ndarray | None = None,
    exact_final_residual: bool = True,
) -> ReconResult:
    """Geometric alpha sweep stopped by the discrepancy principle.

    Iterates ``alpha_k = alpha0 / ratio^k`` with warm-started solves and
    returns the first iterate whose residual is <= ``tau * delta``; if
    ``alpha_min`` is reached first, the last iterate is returned flagged
    ``discrepancy_satisfied = False``.
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    grid = P.grid
    tt = _normal_op(P, kernel)
    if rhs is None:
        rhs = adjoint_cov(P, C_obs).values
    c_norm_sq = hs_norm(C_obs) ** 2
    alpha = cfg.alpha0 if cfg.alpha0 is not None else _default_alpha0(P, cfg.m, tt)

    w = grid.weight
    m = cfg.m
    if m == 0:
        precond = lambda r: r  # noqa: E731
    else:
        precond = lambda r: apply_multiplier(SourceField(grid, r), -m).values  # noqa: E731

    q = SourceField(grid, np.zeros(grid.size))
    iterations: list[int] = []
    residual = np.sqrt(c_norm_sq)
    prev_residual = np.inf
    satisfied = False
    while True:
        a = alpha

        def apply_full(v: np.ndarray) -> np.ndarray:
            return tt(v) + a * sobolev_apply(SourceField(grid, v), m).values

        x, n_iter, _ = _pcg(apply_full, precond, rhs, q.values, cfg.cg_tol, cfg.cg_maxit)
        q = SourceField(grid, x)
        iterations.append(n_iter)
        res_sq = w * float(q.values @ tt(q.values)) - 2 * w * float(q.values @ rhs) + c_norm_sq
        residual = float(np.sqrt(max(res_sq, 0.0)))
        if residual > prev_residual * (1 + 1e-6):
            logger.warning(
                "discrepancy sweep: residual increased %.6e -> %.6e at alpha=%.3e",
                prev_residual,
                residual,
                alpha,
            )
        prev_residual = residual
        logger.debug("alpha=%.3e residual=%.6e target=%.6e", alpha, residual, cfg.tau * delta)
        if residual <= cfg.tau * delta:
            satisfied = True
            break
        if alpha / cfg.ratio < cfg.alpha_min:
            logger.warning("discrepancy sweep hit alpha floor %.1e unsatisfied", cfg.alpha_min)
            break
        alpha /= cfg.ratio

    if exact_final_residual:
        residual = hs_dist(forward_cov(P, q), C_obs)
    return ReconResult(
        q_alpha=q,
        alpha_final=alpha,
        residual=residual,
        iterations=iterations,
        discrepancy_satisfied=satisfied,
    )


def recon_error(q_alpha: SourceField, q_dagger: SourceField, m_err: float) -> float:
    """``||q_alpha - q_dagger||_{H^{m_err}}``; m_err = 0 is the weighted L^2 distance."""
    diff = SourceField(q_alpha.grid, q_alpha.values - q_dagger.values)
    return sobolev_norm(diff, m_err)


def config_with(cfg: TikhonovConfig, **kwargs) -> TikhonovConfig:
    """Frozen-dataclass update helper."""
    return replace(cfg, **kwargs)
