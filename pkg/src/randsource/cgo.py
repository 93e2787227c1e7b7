"""Complex-geometrical-optics (CGO) solutions and stability identities.

``u_xi(x) = exp(i xi . x)`` solves the Helmholtz equation whenever the
bilinear (not Hermitian) product satisfies ``xi . xi = kappa^2``.  Pairs
``(a, b)`` with ``a - conj(b) = -gamma`` make ``u_a conj(u_b) =
exp(-i gamma . x)``, turning covariance data into Fourier coefficients
of the source strength.

The single-layer operator on the sphere S_R diagonalizes in spherical
harmonics with eigenvalues ``sigma_l = i kappa R^2 j_l(kappa R)
h_l^(1)(kappa R)``; solving ``S phi = conj(u_xi)|_{S_R}`` and
conjugating yields the density with ``u_xi|_D = G* phi``, which the
verification routines check numerically together with the Fourier
identity ``(2 pi)^{3/2} (q1 - q2)^(gamma) = <G M_{q1-q2} G* phi_a, phi_b>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import SourceField, fourier_coeff
from .operators import (
    HarmonicCoeffs,
    MeasurementBasis,
    PotentialMatrix,
    apply_Gstar,
    build_potential,
)
from .specfun import degree_orders, sph_bessel_j, sph_hankel1
from .sphere import conjugate_coeffs, project, sphere_grid

__all__ = [
    "CgoVector",
    "CgoPair",
    "cgo_field",
    "build_cgo_pair",
    "single_layer_eigenvalues",
    "single_layer_solve",
    "cgo_density",
    "verify_lemma41",
    "verify_fourier_identity",
]

_INVARIANT_RTOL = 1e-12


@dataclass(frozen=True)
class CgoVector:
    """Complex frequency xi of a CGO solution, with xi . xi = kappa^2."""

    xi: np.ndarray  # complex 3-vector
    t: float  # |Im xi| > 0
    kappa: float

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex).reshape(3)
        object.__setattr__(self, "xi", xi)
        if self.t <= 0:
            raise ValueError("t = |Im xi| must be > 0")
        scale = max(self.kappa**2, 1.0)
        if abs(complex(xi @ xi) - self.kappa**2) > _INVARIANT_RTOL * scale:
            raise ValueError("xi . xi != kappa^2 (bilinear product)")
        if abs(np.linalg.norm(xi.imag) - self.t) > _INVARIANT_RTOL * max(self.t, 1.0):
            raise ValueError("|Im xi| != t")


@dataclass(frozen=True)
class CgoPair:
    """CGO frequencies with a - conj(b) = -gamma, encoding e^{-i gamma . x}."""

    a: np.ndarray
    b: np.ndarray
    gamma: np.ndarray
    t: float
    kappa: float
    d1: np.ndarray
    d2: np.ndarray


def cgo_field(xi: np.ndarray | CgoVector, points: np.ndarray) -> np.ndarray:
    """``u_xi`` at points of shape (..., 3)."""
    v = xi.xi if isinstance(xi, CgoVector) else np.asarray(xi, dtype=complex)
    return np.exp(1j * (points @ v))


def _frame_orthogonal_to(gamma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic unit vectors d1, d2 with d1 _|_ d2 _|_ gamma.

    For gamma = 0 the canonical axes e1, e2 are used; otherwise e2, e3
    are reflected by the Householder map taking e1 to gamma/|gamma|.
    """
    norm = np.linalg.norm(gamma)
    if norm == 0.0:
        return np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    ghat = gamma / norm
    v = ghat - np.array([1.0, 0.0, 0.0])
    vsq = v @ v
    if vsq < 1e-24:  # gamma already along e1
        return np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    house = np.eye(3) - (2.0 / vsq) * np.outer(v, v)
    return house[:, 1].copy(), house[:, 2].copy()


def build_cgo_pair(gamma: np.ndarray, t: float, kappa: float) -> CgoPair:
    """CGO pair for frequency gamma at imaginary size t.

    ``a = -gamma/2 + i t d1 + s d2`` and ``b = gamma/2 - i t d1 + s d2``
    with ``s = sqrt(kappa^2 + t^2 - |gamma|^2 / 4)``; requires
    ``|gamma| <= 2 sqrt(kappa^2 + t^2)``.
    """
    gamma = np.asarray(gamma, dtype=float).reshape(3)
    if t <= 0:
        raise ValueError("t must be > 0")
    rho = np.linalg.norm(gamma)
    bound = 2.0 * math.sqrt(kappa**2 + t**2)
    if rho > bound * (1 + 1e-14):
        raise ValueError(f"|gamma| = {rho:.6g} exceeds the admissible bound 2*sqrt(kappa^2+t^2) = {bound:.6g}")
    d1, d2 = _frame_orthogonal_to(gamma)
    s = math.sqrt(max(kappa**2 + t**2 - rho**2 / 4.0, 0.0))
    a = -gamma / 2.0 + 1j * t * d1 + s * d2
    b = gamma / 2.0 - 1j * t * d1 + s * d2
    return CgoPair(a=a, b=b, gamma=gamma, t=t, kappa=kappa, d1=d1, d2=d2)


def single_layer_eigenvalues(basis: MeasurementBasis) -> np.ndarray:
    """Eigenvalues sigma_l, l = 0..L, of the single-layer operator on S_R.

    Rejects wave numbers whose square is (numerically) a Dirichlet
    eigenvalue of the ball, i.e. ``j_l(kappa R)`` vanishes.  Only degrees
    ``l <= kappa R`` can produce such zeros; beyond that the Bessel
    functions decay monotonically without crossing zero, so tiny tail
    values are legitimate eigenvalues, not near-singularities.
    """
    kappa, R, L = basis.kappa, basis.R, basis.L
    jl = sph_bessel_j(L, np.array([kappa * R]))[:, 0]
    hl = sph_hankel1(L, np.array([kappa * R]))[:, 0]
    l_osc = min(L, math.ceil(kappa * R))
    bad = np.nonzero(np.abs(jl[: l_osc + 1]) < 1e-12)[0]
    if bad.size:
        raise ValueError(
            f"kappa^2 is numerically a Dirichlet eigenvalue of the ball: "
            f"j_{bad[0]}(kappa R) = {jl[bad[0]]:.3e}"
        )
    return 1j * kappa * R**2 * jl * hl


def single_layer_solve(basis: MeasurementBasis, g: HarmonicCoeffs) -> HarmonicCoeffs:
    """Solve ``S phi = g`` on the sphere by diagonal inversion."""
    if g.basis != basis:
        raise ValueError("coefficients do not belong to the given basis")
    sigma = single_layer_eigenvalues(basis)
    ls, _ = degree_orders(basis.L)
    return HarmonicCoeffs(basis, g.c / sigma[ls])


def _project_surface(basis: MeasurementBasis, values_fn) -> HarmonicCoeffs:
    """Project a function given pointwise on S_R onto the basis by quadrature."""
    sg = sphere_grid(basis.L, basis.R)
    vals = values_fn(sg.points())
    return HarmonicCoeffs(basis, project(sg, vals, basis.L))


def cgo_density(basis: MeasurementBasis, xi: CgoVector) -> HarmonicCoeffs:
    """Density phi on S_R with ``G* phi = u_xi`` inside the sphere.

    phi = conj(S^{-1} (conj(u_xi)|_{S_R})).
    """
    xic = np.conj(xi.xi)
    g = _project_surface(basis, lambda pts: np.exp(-1j * (pts @ xic)))
    psi = single_layer_solve(basis, g)
    return HarmonicCoeffs(basis, conjugate_coeffs(psi.c))


def verify_lemma41(
    basis: MeasurementBasis,
    grid,
    xi: CgoVector,
    P: PotentialMatrix | None = None,
) -> dict:
    """Check ``u_xi = G* phi`` on the grid and report the density size.

    Returns ``rel_error`` (max pointwise gap over max |u_xi|), ``phi_norm``
    (L^2(S_R) norm), and ``bound_rhs = sqrt(1 + t^2 + kappa^2) e^{R t}``
    for empirical-constant reporting.
    """
    needed = math.ceil((xi.kappa + xi.t) * basis.R) + 15
    if basis.L < needed:
        raise ValueError(f"truncation L={basis.L} too small; need L >= {needed} for kappa={xi.kappa}, t={xi.t}")
    phi = cgo_density(basis, xi)
    if P is None:
        P = build_potential(grid, basis)
    gstar = apply_Gstar(P, phi)
    u = cgo_field(xi, grid.points())
    scale = np.abs(u).max()
    rel_error = float(np.abs(gstar - u).max() / scale)
    return {
        "rel_error": rel_error,
        "phi_norm": float(np.linalg.norm(phi.c)),
        "bound_rhs": float(math.sqrt(1.0 + xi.t**2 + xi.kappa**2) * math.exp(basis.R * xi.t)),
    }


def verify_fourier_identity(
    P: PotentialMatrix,
    q1: SourceField,
    q2: SourceField,
    gamma: np.ndarray,
    t: float,
) -> dict:
    """Check the CGO Fourier identity on the discretized operators.

    lhs = ``(2 pi)^{3/2} (q1 - q2)^(gamma)``; rhs = the covariance
    difference operator sandwiched between the pair densities phi_a,
    phi_b.  Returns both values and their relative gap.
    """
    basis = P.basis
    pair = build_cgo_pair(gamma, t, basis.kappa)
    phi_a = cgo_density(basis, CgoVector(pair.a, t, basis.kappa))
    phi_b = cgo_density(basis, CgoVector(pair.b, t, basis.kappa))
    ga = apply_Gstar(P, phi_a)  # u_a on the grid, via the density
    gb = apply_Gstar(P, phi_b)
    dq = q1.values - q2.values
    rhs = complex(P.w * np.sum(dq * ga * np.conj(gb)))
    diff = SourceField(P.grid, dq)
    lhs = (2 * np.pi) ** 1.5 * fourier_coeff(diff, gamma)
    denom = max(abs(lhs), abs(rhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_error": float(abs(lhs - rhs) / denom)}
