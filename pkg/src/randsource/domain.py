"""Source-domain discretization: grids, Sobolev norms, spline phantoms.

The source cube is ``D = [-pi/sqrt(3), pi/sqrt(3)]^3``; the 2D variant is
the midplane slice of the same square cross-section.  Grids are
cell-centered so that no point falls on the origin (where the angular
direction of a point is undefined) and all quadrature weights are equal.

The discrete ``H^m`` inner product is defined through the periodic
discrete Fourier transform: ``B_m = F^-1 diag((1 + |gamma|^2)^m) F`` with
frequencies ``gamma_k = 2 pi k / side``, and
``||q||_{H^m}^2 = <q, B_m q>_w`` in the weighted grid inner product
``<p, q>_w = w sum_j p_j q_j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import BSpline

__all__ = [
    "SIDE_DEFAULT",
    "Grid",
    "SourceField",
    "SplinePhantom",
    "make_grid",
    "sobolev_apply",
    "sobolev_norm",
    "weighted_inner",
    "phantom_random",
    "phantom_shapes",
    "eval_phantom",
    "fourier_coeff",
    "save_field",
    "load_field",
    "save_phantom",
    "load_phantom",
]

SIDE_DEFAULT = 2 * np.pi / np.sqrt(3.0)
_KNOT_INTERVALS = 12


@dataclass(frozen=True)
class Grid:
    """Cell-centered uniform grid over the source cube or its 2D slice."""

    dim: int
    n: int
    side: float

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.n % 2 != 0 or self.n < 4:
            raise ValueError("n must be even and >= 4 (cell-centered grid must avoid the origin)")

    @property
    def h(self) -> float:
        return self.side / self.n

    @property
    def weight(self) -> float:
        """Quadrature weight per point (cell volume, resp. area)."""
        return self.h**self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    def axis(self) -> np.ndarray:
        """Cell-centered coordinates along one axis."""
        return -self.side / 2 + (np.arange(self.n) + 0.5) * self.h

    def points(self) -> np.ndarray:
        """All grid points, shape (size, 3); 2D grids sit in the x3 = 0 plane."""
        ax = self.axis()
        if self.dim == 3:
            x1, x2, x3 = np.meshgrid(ax, ax, ax, indexing="ij")
        else:
            x1, x2 = np.meshgrid(ax, ax, indexing="ij")
            x3 = np.zeros_like(x1)
        return np.stack([x1.ravel(), x2.ravel(), x3.ravel()], axis=-1)

    def frequencies(self) -> np.ndarray:
        """Discrete Fourier frequencies gamma_k = 2 pi k / side per axis."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def radii_angles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(r, theta, phi) spherical coordinates of all grid points."""
        pts = self.points()
        r = np.linalg.norm(pts, axis=-1)
        theta = np.arccos(np.clip(pts[:, 2] / r, -1.0, 1.0))
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        return r, theta, phi


@dataclass
class SourceField:
    """Real-valued source strength sampled on a grid."""

    grid: Grid
    values: np.ndarray  # flat, length grid.size

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.grid.size:
            raise ValueError("value count does not match grid")

    def reshape(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)


@dataclass(frozen=True)
class SplinePhantom:
    """Tensor-product B-spline representation of an exact source strength.

    Equidistant knots split each axis of the cube into 12 subintervals;
    the basis consists of the ``12 + degree`` B-splines overlapping the
    cube.  A degree-``lambda`` spline lies in ``H^s`` for every
    ``s < lambda + 1/2``; ``smoothness`` reports ``lambda + 1/2 - eps``
    with ``eps = 0.01``.
    """

    degree: int
    dim: int
    coeffs: np.ndarray  # shape (12 + degree,) * dim, nonnegative
    side: float = SIDE_DEFAULT

    SMOOTHNESS_EPS = 0.01

    def __post_init__(self):
        if self.degree not in (1, 3):
            raise ValueError("spline degree must be 1 or 3")
        nb = _KNOT_INTERVALS + self.degree
        if self.coeffs.shape != (nb,) * self.dim:
            raise ValueError(f"coefficient tensor must have shape {(nb,) * self.dim}")

    @property
    def knots(self) -> np.ndarray:
        """Full equidistant knot vector of the 1D spline space."""
        a = self.side / 2
        h = self.side / _KNOT_INTERVALS
        k = self.degree
        return -a + h * np.arange(-k, _KNOT_INTERVALS + k + 1)

    @property
    def smoothness(self) -> float:
        return self.degree + 0.5 - self.SMOOTHNESS_EPS

    def design_matrix(self, x: np.ndarray) -> np.ndarray:
        """1D B-spline design matrix at points x, shape (len(x), n_basis)."""
        t = self.knots
        return BSpline.design_matrix(x, t, self.degree).toarray()

    def greville(self) -> np.ndarray:
        """Greville abscissae of the 1D basis."""
        t = self.knots
        k = self.degree
        return np.array([t[i + 1 : i + k + 1].mean() for i in range(len(t) - k - 1)])


def make_grid(dim: int, n: int, side: float = SIDE_DEFAULT) -> Grid:
    return Grid(dim=dim, n=n, side=side)


def _fourier_multiplier(grid: Grid, exponent: float) -> np.ndarray:
    freq = grid.frequencies()
    gsq = np.zeros(grid.shape)
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = grid.n
        gsq = gsq + (freq**2).reshape(shape)
    return (1.0 + gsq) ** exponent


def apply_multiplier(field: SourceField, exponent: float) -> SourceField:
    """Apply ``F^-1 diag((1+|gamma|^2)^exponent) F``; negative exponents allowed.

    Exposed separately from :func:`sobolev_apply` so solvers can use
    ``B_m^{-1}`` and ``B_m^{+-1/2}`` as preconditioners.
    """
    vals = field.reshape()
    out = np.fft.ifftn(_fourier_multiplier(field.grid, exponent) * np.fft.fftn(vals))
    return SourceField(field.grid, np.real(out).ravel())


def sobolev_apply(field: SourceField, m: float) -> SourceField:
    """Apply the H^m Gram operator B_m (self-adjoint, positive definite)."""
    if m < 0:
        raise ValueError("Sobolev index m must be >= 0")
    if m == 0:
        return SourceField(field.grid, field.values.copy())
    return apply_multiplier(field, m)


def weighted_inner(a: SourceField, b: SourceField) -> float:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    return a.grid.weight * float(np.dot(a.values, b.values))


def sobolev_norm(field: SourceField, m: float) -> float:
    """``||q||_{H^m} = sqrt(<q, B_m q>_w)``; m = 0 is the weighted L^2 norm."""
    val = weighted_inner(field, sobolev_apply(field, m))
    return float(np.sqrt(max(val, 0.0)))


def phantom_random(degree: int, seed: int, dim: int = 3, side: float = SIDE_DEFAULT) -> SplinePhantom:
    """Random nonnegative phantom: coefficients |X| with X ~ N(0, 1) iid."""
    nb = _KNOT_INTERVALS + degree
    rng = np.random.default_rng(seed)
    coeffs = np.abs(rng.standard_normal((nb,) * dim))
    return SplinePhantom(degree=degree, dim=dim, coeffs=coeffs, side=side)


def _shapes_indicator(points: np.ndarray, dim: int) -> np.ndarray:
    """Indicator-like target: hemispherical shell plus a small ball (3D) or
    an open annulus plus a disc (2D).  Shape parameters are a design choice."""
    if dim == 3:
        r = np.linalg.norm(points, axis=-1)
        shell = (r >= 0.65) & (r <= 0.95) & (points[..., 2] <= 0.0)
        ball = np.linalg.norm(points - np.array([0.55, 0.0, 0.55]), axis=-1) <= 0.25
        return (shell | ball).astype(float)
    r = np.linalg.norm(points, axis=-1)
    ang = np.arctan2(points[..., 1], points[..., 0])
    annulus = (r >= 0.65) & (r <= 0.95) & ~(np.abs(ang - np.pi / 2) <= 0.35)
    disc = np.linalg.norm(points - np.array([0.55, 0.0]), axis=-1) <= 0.25
    return (annulus | disc).astype(float)


def phantom_shapes(degree: int, dim: int = 3, side: float = SIDE_DEFAULT) -> SplinePhantom:
    """Deterministic phantom approximating simple geometric shapes.

    Coefficients are samples of an indicator-like target at the Greville
    abscissae, hence nonnegative.
    """
    probe = SplinePhantom(
        degree=degree,
        dim=dim,
        coeffs=np.zeros((_KNOT_INTERVALS + degree,) * dim),
        side=side,
    )
    g = probe.greville()
    grids = np.meshgrid(*([g] * dim), indexing="ij")
    pts = np.stack([x for x in grids], axis=-1)
    coeffs = _shapes_indicator(pts, dim)
    return SplinePhantom(degree=degree, dim=dim, coeffs=coeffs, side=side)


def eval_phantom(phantom: SplinePhantom, grid: Grid) -> SourceField:
    """Pointwise tensor-product evaluation of a phantom on a grid."""
    if phantom.dim != grid.dim:
        raise ValueError("phantom and grid dimensions differ")
    if abs(phantom.side - grid.side) > 1e-12:
        raise ValueError("phantom and grid side lengths differ")
    b = phantom.design_matrix(grid.axis())
    if grid.dim == 3:
        vals = np.einsum("ai,bj,ck,ijk->abc", b, b, b, phantom.coeffs)
    else:
        vals = np.einsum("ai,bj,ij->ab", b, b, phantom.coeffs)
    return SourceField(grid, vals.ravel())


def eval_phantom_at(phantom: SplinePhantom, points: np.ndarray) -> np.ndarray:
    """Evaluate a phantom at arbitrary points inside the cube, shape (..., dim)."""
    points = np.atleast_2d(points)
    mats = [phantom.design_matrix(points[:, axis]) for axis in range(phantom.dim)]
    if phantom.dim == 3:
        return np.einsum("pi,pj,pk,ijk->p", mats[0], mats[1], mats[2], phantom.coeffs)
    return np.einsum("pi,pj,ij->p", mats[0], mats[1], phantom.coeffs)


def fourier_coeff(field: SourceField, gamma: np.ndarray) -> complex:
    """Quadrature approximation of the Fourier transform at frequency gamma.

    ``(2 pi)^{-dim/2} sum_j w q_j exp(-i gamma . z_j)`` with the grid's
    native dimension; 3-vectors passed to a 2D grid use the in-plane part
    (points sit at x3 = 0).
    """
    gamma = np.asarray(gamma, dtype=float)
    pts = field.grid.points()  # (J, 3)
    g3 = np.zeros(3)
    g3[: gamma.size] = gamma
    phase = np.exp(-1j * (pts @ g3))
    w = field.grid.weight
    return complex((2 * np.pi) ** (-field.grid.dim / 2) * w * np.sum(field.values * phase))


def save_field(field: SourceField, path: str | Path) -> None:
    """Write a field as little-endian float64 binary with a JSON sidecar."""
    path = Path(path)
    field.values.astype("<f8").tofile(path)
    sidecar = {"dim": field.grid.dim, "n": field.grid.n, "side": field.grid.side}
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar))


def load_field(path: str | Path) -> SourceField:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    grid = Grid(dim=meta["dim"], n=meta["n"], side=meta["side"])
    values = np.fromfile(path, dtype="<f8")
    return SourceField(grid, values)


def save_phantom(phantom: SplinePhantom, path: str | Path) -> None:
    doc = {
        "degree": phantom.degree,
        "dim": phantom.dim,
        "side": phantom.side,
        "knots": phantom.knots.tolist(),
        "coeffs": phantom.coeffs.tolist(),
    }
    Path(path).write_text(json.dumps(doc))


def load_phantom(path: str | Path) -> SplinePhantom:
    doc = json.loads(Path(path).read_text())
    return SplinePhantom(
        degree=doc["degree"],
        dim=doc["dim"],
        coeffs=np.asarray(doc["coeffs"], dtype=float),
        side=doc["side"],
    )
