"""Synthetic covariance data: circular Gaussian sampling and additive noise.

Random numbers come from counter-based Philox streams keyed by
``(seed, sample index)``, so sample i is reproducible independently of
how many samples are drawn before it or of any parallel scheduling.
The source-sample convention puts the variance ``q_j`` directly on the
grid values (quadrature weights live inside the volume potential), which
makes ``E[C_obs] = forward_cov(q)`` hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import SourceField
from .operators import CovMatrix, PotentialMatrix, forward_cov, hs_dist, hs_norm

__all__ = ["NoiseSpec", "sample_source", "sample_covariance", "additive_noise"]


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model for one synthetic data set."""

    mode: str  # "sample" | "additive"
    seed: int
    N: int = 0
    delta_target: float = 0.0

    def __post_init__(self):
        if self.mode not in ("sample", "additive"):
            raise ValueError("mode must be 'sample' or 'additive'")
        if self.mode == "sample" and self.N < 1:
            raise ValueError("sample mode needs N >= 1")
        if self.mode == "additive" and self.delta_target <= 0:
            raise ValueError("additive mode needs delta_target > 0")


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, index]))


def sample_source(q_dagger: SourceField, seed: int, index: int = 0) -> np.ndarray:
    """One draw of the complex Gaussian source, ``xi_j ~ N_C(0, q_j)``.

    ``E[xi_j conj(xi_k)] = q_j delta_jk`` and ``E[xi_j xi_k] = 0``
    (circular symmetry).
    """
    q = q_dagger.values
    if np.any(q < 0):
        raise ValueError("source power must be nonnegative")
    rng = _sample_rng(seed, index)
    zeta = rng.standard_normal(q.size)
    eta = rng.standard_normal(q.size)
    return np.sqrt(q / 2.0) * (zeta + 1j * eta)


def sample_covariance(
    P: PotentialMatrix,
    q_dagger: SourceField,
    N: int,
    seed: int,
    batch: int = 256,
) -> tuple[CovMatrix, float]:
    """Sample covariance of N simulated measurements and its noise level.

    ``C_obs = (1/N) sum_i (G xi_i)(G xi_i)^H`` accumulated in a fixed
    batch order (bit-reproducible); ``delta`` is the exact HS distance to
    ``forward_cov(q_dagger)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    m = P.basis.size
    acc = np.zeros((m, m), dtype=complex)
    for start in range(0, N, batch):
        count = min(batch, N - start)
        xi = np.empty((P.grid.size, count), dtype=complex)
        for i in range(count):
            xi[:, i] = sample_source(q_dagger, seed, start + i)
        y = P.A @ (P.w * xi)  # (M, count) measurement coefficients
        acc += y @ y.conj().T
    c_obs = CovMatrix(P.basis, acc / N)
    delta = hs_dist(c_obs, forward_cov(P, q_dagger))
    return c_obs, delta


def additive_noise(C_dagger: CovMatrix, delta_target: float, seed: int) -> tuple[CovMatrix, float]:
    """Exact data plus Hermitian Gaussian noise of prescribed HS norm.

    Returns ``C_obs = C + delta * E / ||E||_HS`` with E the Hermitian
    part of an iid complex Gaussian matrix, so the returned noise level
    equals ``delta_target`` exactly.
    """
    if delta_target <= 0:
        raise ValueError("delta_target must be > 0")
    m = C_dagger.basis.size
    rng = _sample_rng(seed, 0)
    g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    e = 0.5 * (g + g.conj().T)
    e /= hs_norm(e)
    c_obs = CovMatrix(C_dagger.basis, C_dagger.entries + delta_target * e)
    return c_obs, float(delta_target)


def noise_direction(basis_size: int, seed: int) -> np.ndarray:
    """Unit-HS-norm Hermitian noise matrix used by :func:`additive_noise`.

    Exposed so experiment sweeps over several noise levels can reuse one
    direction and vary only the amplitude.
    """
    rng = _sample_rng(seed, 0)
    g = rng.standard_normal((basis_size, basis_size)) + 1j * rng.standard_normal((basis_size, basis_size))
    e = 0.5 * (g + g.conj().T)
    return e / np.linalg.norm(e)
