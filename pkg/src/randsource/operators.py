"""Measurement-side linear algebra for the covariance forward map.

Measurements live on a sphere S_R expanded in the orthonormalized
spherical-harmonics basis ``e_lm = Y_lm / R``.  Through the addition
theorem for the Helmholtz fundamental solution, the volume potential has
the explicit matrix

    A[(l, m), j] = R * i kappa * h_l(kappa R) * j_l(kappa |z_j|) * conj(Y_lm(z_j / |z_j|)),

and the covariance forward map is ``T q = A diag(w^2 q) A^H`` with the
uniform quadrature weight ``w``.  All adjoints are taken with respect to
the weighted grid inner product ``<p, q>_w = w sum_j p_j q_j`` and the
Hilbert-Schmidt (Frobenius) inner product on matrices, so that
``<T q, M>_HS = <q, T* M>_w`` holds exactly.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import Grid, SourceField
from .specfun import flat_size, sph_bessel_j, sph_hankel1, sph_harmonics_blocks

__all__ = [
    "MeasurementBasis",
    "HarmonicCoeffs",
    "CovMatrix",
    "PotentialMatrix",
    "build_potential",
    "apply_G",
    "apply_Gstar",
    "forward_cov",
    "adjoint_cov",
    "hs_norm",
    "hs_dist",
    "normal_kernel",
    "save_cov",
    "load_cov",
]

logger = logging.getLogger(__name__)

DEFAULT_L_MARGIN = 15


@dataclass(frozen=True)
class MeasurementBasis:
    """Truncated spherical-harmonics basis on the measurement sphere S_R.

    The default truncation ``L = ceil(kappa R) + 15`` keeps the
    super-exponentially decaying tail of ``h_l(kappa R) j_l(kappa |z|)``
    below ~1e-8 for sources strictly inside the sphere.
    """

    kappa: float
    R: float = 4.0
    L: int | None = None

    def __post_init__(self):
        if self.kappa <= 0 or self.R <= 0:
            raise ValueError("kappa and R must be positive")
        if self.L is None:
            object.__setattr__(self, "L", math.ceil(self.kappa * self.R) + DEFAULT_L_MARGIN)
        if self.L < math.ceil(self.kappa * self.R):
            raise ValueError("truncation degree L must be >= ceil(kappa R)")

    @property
    def size(self) -> int:
        """Number of basis functions M = (L + 1)^2."""
        return flat_size(self.L)


@dataclass
class HarmonicCoeffs:
    """Coefficients of an L^2(S_R) function in the e_lm basis."""

    basis: MeasurementBasis
    c: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=complex).ravel()
        if self.c.size != self.basis.size:
            raise ValueError("coefficient count does not match basis size")


@dataclass
class CovMatrix:
    """Hermitian matrix representing a Hilbert-Schmidt operator on the
    truncated measurement space; the HS norm is the Frobenius norm."""

    basis: MeasurementBasis
    entries: np.ndarray

    def __post_init__(self):
        m = self.basis.size
        if self.entries.shape != (m, m):
            raise ValueError("entry matrix does not match basis size")

    def herm_defect(self) -> float:
        """Relative deviation from Hermitian symmetry."""
        nrm = np.linalg.norm(self.entries)
        if nrm == 0:
            return 0.0
        return float(np.linalg.norm(self.entries - self.entries.conj().T) / nrm)


@dataclass
class PotentialMatrix:
    """Assembled volume-potential matrix A (basis x grid)."""

    grid: Grid
    basis: MeasurementBasis
    A: np.ndarray = field(repr=False)

    @property
    def w(self) -> float:
        return self.grid.weight


def build_potential(grid: Grid, basis: MeasurementBasis) -> PotentialMatrix:
    """Assemble A; fails if any grid point reaches the measurement sphere."""
    r, theta, phi = grid.radii_angles()
    if r.max() >= basis.R:
        raise ValueError(f"grid radius {r.max():.3f} reaches measurement sphere R={basis.R}")
    L, kappa, R = basis.L, basis.kappa, basis.R
    jl = sph_bessel_j(L, kappa * r)  # (L+1, J)
    hl = sph_hankel1(L, kappa * R)  # (L+1,)
    A = np.empty((basis.size, grid.size), dtype=complex)
    for l, y in sph_harmonics_blocks(L, theta, phi):
        base = l * l
        radial = (R * 1j * kappa * hl[l]) * jl[l]
        A[base : base + 2 * l + 1] = radial * np.conj(y)
    return PotentialMatrix(grid=grid, basis=basis, A=A)


def apply_G(P: PotentialMatrix, psi: np.ndarray) -> HarmonicCoeffs:
    """Volume potential of a (possibly complex) source density; includes
    the quadrature weight."""
    psi = np.asarray(psi).ravel()
    if psi.size != P.grid.size:
        raise ValueError("density length does not match grid")
    return HarmonicCoeffs(P.basis, P.A @ (P.w * psi))


def apply_Gstar(P: PotentialMatrix, phi: HarmonicCoeffs) -> np.ndarray:
    """Adjoint volume potential evaluated at the grid points (no weights),
    so that ``<G psi, phi> = <psi, G* phi>_w``."""
    return P.A.conj().T @ phi.c


def forward_cov(P: PotentialMatrix, q: SourceField) -> CovMatrix:
    """Covariance forward map ``T q = A diag(w^2 q) A^H`` (Hermitian)."""
    if q.grid != P.grid:
        raise ValueError("field grid does not match potential grid")
    C = (P.A * (P.w**2 * q.values)) @ P.A.conj().T
    C = 0.5 * (C + C.conj().T)
    return CovMatrix(P.basis, C)


def adjoint_cov(P: PotentialMatrix, M: CovMatrix) -> SourceField:
    """Adjoint ``(T* M)_j = w a_j^H M a_j`` of the covariance map, defined
    by ``<T q, M>_HS = <q, T* M>_w``.

    Non-Hermitian input is replaced by its Hermitian part with a warning.
    """
    entries = M.entries
    if M.herm_defect() > 1e-10:
        logger.warning("adjoint_cov: Hermitianizing input (defect %.2e)", M.herm_defect())
        entries = 0.5 * (entries + entries.conj().T)
    vals = P.w * np.real(np.einsum("ij,ij->j", np.conj(P.A), entries @ P.A))
    return SourceField(P.grid, vals)


def hs_norm(M: CovMatrix | np.ndarray) -> float:
    entries = M.entries if isinstance(M, CovMatrix) else M
    return float(np.linalg.norm(entries))


def hs_dist(M1: CovMatrix, M2: CovMatrix) -> float:
    return float(np.linalg.norm(M1.entries - M2.entries))


def normal_kernel(P: PotentialMatrix, block: int = 1024) -> np.ndarray:
    """Dense kernel of the normal operator, ``(T*T q) = K q``.

    ``K[j, k] = w^3 |a_j^H a_k|^2`` is symmetric positive semidefinite,
    of size J x J.  Precomputing it trades memory for speed: one matrix
    product per conjugate-gradient iteration instead of two large
    rectangular products.  Intended for experiment runs on grids where
    J^2 doubles fit comfortably in memory; the solvers default to the
    matrix-free path.
    """
    A = P.A
    J = A.shape[1]
    K = np.empty((J, J))
    w3 = P.w**3
    for j0 in range(0, J, block):
        j1 = min(j0 + block, J)
        g = A[:, j0:j1].conj().T @ A  # (block, J) Gram rows
        # |g|^2 assembled in place to keep peak memory at one block
        np.multiply(g.real, g.real, out=K[j0:j1])
        gi2 = np.square(g.imag)
        K[j0:j1] += gi2
        K[j0:j1] *= w3
    return K


def save_cov(M: CovMatrix, path: str | Path) -> None:
    """Write a covariance matrix as little-endian complex128 binary with a
    JSON sidecar."""
    path = Path(path)
    M.entries.astype("<c16").tofile(path)
    sidecar = {
        "M": M.basis.size,
        "L": M.basis.L,
        "R": M.basis.R,
        "kappa": M.basis.kappa,
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar))


def load_cov(path: str | Path) -> CovMatrix:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    basis = MeasurementBasis(kappa=meta["kappa"], R=meta["R"], L=meta["L"])
    m = meta["M"]
    entries = np.fromfile(path, dtype="<c16").reshape(m, m)
    return CovMatrix(basis, entries)
