"""Quadrature on a sphere of radius R and spherical-harmonics projection.

A product grid of Gauss-Legendre nodes in the polar angle and uniform
nodes in azimuth integrates spherical polynomials exactly once the node
counts exceed the bandwidth.  Projection and synthesis use the FFT over
the azimuth and a weighted Legendre sum over the polar nodes.

Coefficients refer to the basis ``e_lm = Y_lm / R``, orthonormal in
``L^2(S_R)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import flat_size, sph_harmonics_blocks

__all__ = ["SphereGrid", "sphere_grid", "project", "synthesize", "conjugate_coeffs"]


@dataclass(frozen=True)
class SphereGrid:
    """Product quadrature grid on the sphere of radius ``radius``."""

    radius: float
    l_max: int
    theta: np.ndarray  # Gauss-Legendre polar nodes, shape (nt,)
    phi: np.ndarray  # uniform azimuth nodes, shape (nph,)
    theta_weights: np.ndarray  # GL weights wrt d(cos theta), shape (nt,)

    @property
    def shape(self) -> tuple[int, int]:
        return self.theta.size, self.phi.size

    def points(self) -> np.ndarray:
        """Cartesian coordinates, shape (nt, nph, 3)."""
        th = self.theta[:, None]
        ph = self.phi[None, :]
        r = self.radius
        return np.stack(
            [
                r * np.sin(th) * np.cos(ph) + 0.0 * ph,
                r * np.sin(th) * np.sin(ph) + 0.0 * ph,
                r * np.cos(th) + 0.0 * ph,
            ],
            axis=-1,
        )

    def integrate(self, values: np.ndarray) -> complex:
        """Surface integral over S_R of values sampled on the grid."""
        dphi = 2 * np.pi / self.phi.size
        return self.radius**2 * dphi * np.einsum("t,tp->", self.theta_weights, values)


def sphere_grid(l_max: int, radius: float, n_theta: int | None = None, n_phi: int | None = None) -> SphereGrid:
    """Grid resolving products of harmonics up to degree ``l_max``.

    Defaults integrate ``Y_lm * conj(Y_l'm')`` exactly for l, l' <= l_max.
    """
    nt = n_theta if n_theta is not None else l_max + 1
    nph = n_phi if n_phi is not None else 2 * l_max + 1
    nodes, weights = np.polynomial.legendre.leggauss(nt)
    theta = np.arccos(nodes[::-1])
    return SphereGrid(
        radius=float(radius),
        l_max=l_max,
        theta=theta,
        phi=2 * np.pi * np.arange(nph) / nph,
        theta_weights=weights[::-1].copy(),
    )


def project(grid: SphereGrid, values: np.ndarray, l_max: int | None = None) -> np.ndarray:
    """Coefficients of a surface function in the orthonormal e_lm basis.

    ``values`` is sampled on ``grid`` with shape (nt, nph).  Exact for
    band-limited input resolved by the grid.
    """
    l_max = grid.l_max if l_max is None else l_max
    nt, nph = grid.shape
    if values.shape != (nt, nph):
        raise ValueError(f"values shape {values.shape} does not match grid {(nt, nph)}")
    if nph < 2 * l_max + 1:
        raise ValueError("azimuth grid too coarse for requested l_max")
    # azimuthal transform: fhat[t, m] = sum_p values[t, p] e^{-im phi_p} dphi
    fhat = np.fft.fft(values, axis=1) * (2 * np.pi / nph)
    coeffs = np.empty(flat_size(l_max), dtype=complex)
    wt = grid.theta_weights
    for l, y in sph_harmonics_blocks(l_max, grid.theta, np.zeros_like(grid.theta)):
        for m in range(-l, l + 1):
            # e^{im phi} already excluded: y was evaluated at phi = 0
            coeffs[l * (l + 1) + m] = grid.radius * np.sum(wt * np.conj(y[l + m]) * fhat[:, m % nph])
    return coeffs


def synthesize(grid: SphereGrid, coeffs: np.ndarray) -> np.ndarray:
    """Evaluate a coefficient vector on the grid, shape (nt, nph)."""
    l_max = int(round(np.sqrt(coeffs.size))) - 1
    if flat_size(l_max) != coeffs.size:
        raise ValueError("coefficient vector length is not a perfect square")
    nt, nph = grid.shape
    fm = np.zeros((nt, nph), dtype=complex)  # azimuthal spectral content
    for l, y in sph_harmonics_blocks(l_max, grid.theta, np.zeros_like(grid.theta)):
        for m in range(-l, l + 1):
            fm[:, m % nph] += coeffs[l * (l + 1) + m] * y[l + m]
    # values[t, p] = sum_m fm[t, m] e^{im phi_p} / R
    return np.fft.ifft(fm, axis=1) * nph / grid.radius


def conjugate_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of the complex conjugate of a surface function.

    Uses ``conj(Y_lm) = (-1)^m Y_{l,-m}``.
    """
    l_max = int(round(np.sqrt(coeffs.size))) - 1
    out = np.empty_like(coeffs)
    for l in range(l_max + 1):
        base = l * (l + 1)
        for m in range(-l, l + 1):
            out[base + m] = (-1) ** m * np.conj(coeffs[base - m])
    return out
