"""Spherical Bessel/Hankel functions and complex spherical harmonics.

Conventions
-----------
* Spherical harmonics ``Y_lm`` are fully normalized on the unit sphere,
  ``\\int |Y_lm|^2 d\\Omega = 1``, and include the Condon-Shortley phase
  ``(-1)^m`` (physics convention).  The volume potential and its adjoint
  are phase-consistent only because both use this same convention.
* Coefficient vectors are flat, ordered by ``(l, m)`` with ``m`` running
  from ``-l`` to ``l``; the entry for ``(l, m)`` sits at ``l*(l+1) + m``.

Associated Legendre values are computed by the stable l-upward, m-diagonal
recurrence with normalization folded into the recurrence coefficients, so
no overflow occurs for degrees well beyond those used here.  ``j_l`` uses
Miller's downward recurrence, ``y_l`` the (stable) upward one.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "flat_index",
    "flat_size",
    "degree_orders",
    "sph_bessel_j",
    "sph_bessel_y",
    "sph_hankel1",
    "sph_harmonics",
    "sph_harmonics_blocks",
]

_RESCALE_LIMIT = 1e250


def flat_index(l: int, m: int) -> int:
    """Position of (l, m) in a flat coefficient vector."""
    if abs(m) > l:
        raise ValueError(f"invalid order: |m|={abs(m)} > l={l}")
    return l * (l + 1) + m


def flat_size(l_max: int) -> int:
    return (l_max + 1) ** 2


def degree_orders(l_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays of l and m values matching the flat coefficient ordering."""
    ls = np.concatenate([np.full(2 * l + 1, l) for l in range(l_max + 1)])
    ms = np.concatenate([np.arange(-l, l + 1) for l in range(l_max + 1)])
    return ls, ms


def sph_bessel_j(l_max: int, x) -> np.ndarray:
    """Spherical Bessel functions ``j_0(x) .. j_lmax(x)``.

    Uses Miller's downward recurrence started at
    ``l_max + max(20, ceil(10 + x))`` and normalized against the closed
    forms of ``j_0`` or ``j_1`` (whichever is larger in magnitude, to
    stay clear of their zeros).  ``x`` may be a scalar or an array; the
    result has shape ``(l_max + 1,) + shape(x)``.
    """
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x).ravel()
    if not np.all(np.isfinite(xs)) or np.any(xs < 0):
        raise ValueError("x must be finite and >= 0")

    out = np.zeros((l_max + 1, xs.size))
    zero = xs == 0.0
    out[0, zero] = 1.0

    pos = ~zero
    if np.any(pos):
        xp = xs[pos]
        l_start = l_max + max(20, int(np.ceil(10 + xp.max())))
        up = np.zeros_like(xp)  # u_{l+1}
        uc = np.full_like(xp, 1e-300)  # u_l
        u1 = np.zeros_like(xp)
        stored = np.zeros((l_max + 1, xp.size))
        for l in range(l_start, -1, -1):
            if l <= l_max:
                stored[l] = uc
            if l == 1:
                u1 = uc.copy()
            if l > 0:
                um = (2 * l + 1) / xp * uc - up
                up, uc = uc, um
                big = np.abs(uc).max()
                if big > _RESCALE_LIMIT:
                    fac = 1.0 / big
                    uc *= fac
                    up *= fac
                    u1 *= fac
                    stored *= fac
        u0 = uc
        j0t = np.sin(xp) / xp
        j1t = np.sin(xp) / xp**2 - np.cos(xp) / xp
        use0 = np.abs(j0t) >= np.abs(j1t)
        scale = np.where(use0, j0t / u0, j1t / np.where(u1 == 0, 1.0, u1))
        out[:, pos] = stored * scale
    return out.reshape((l_max + 1,) + x.shape)


def sph_bessel_y(l_max: int, x) -> np.ndarray:
    """Spherical Bessel functions of the second kind, by upward recurrence."""
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x).ravel()
    if np.any(xs <= 0):
        raise ValueError("x must be > 0 for y_l")
    out = np.empty((l_max + 1, xs.size))
    out[0] = -np.cos(xs) / xs
    if l_max >= 1:
        out[1] = -np.cos(xs) / xs**2 - np.sin(xs) / xs
    for l in range(1, l_max):
        out[l + 1] = (2 * l + 1) / xs * out[l] - out[l - 1]
    return out.reshape((l_max + 1,) + x.shape)


def sph_hankel1(l_max: int, x) -> np.ndarray:
    """Spherical Hankel functions ``h_l^(1)(x) = j_l(x) + i y_l(x)``, x > 0."""
    return sph_bessel_j(l_max, x) + 1j * sph_bessel_y(l_max, x)


def sph_harmonics_blocks(l_max, theta, phi):
    """Yield ``(l, Y_block)`` with ``Y_block[l + m] = Y_lm(theta, phi)``.

    ``Y_block`` has shape ``(2l + 1,) + shape(theta)``.  Streaming the
    degrees keeps memory low when assembling large matrices.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if np.any(theta < -1e-12) or np.any(theta > np.pi + 1e-12):
        raise ValueError("theta must lie in [0, pi]")
    ct, st = np.cos(theta), np.sin(theta)
    eiphi = np.exp(1j * phi)

    p_prev2 = None  # normalized P rows for degree l-2, m = 0..l-2
    p_prev = None  # degree l-1
    e_m = np.ones_like(eiphi)  # e^{i m phi}, updated per diagonal step
    e_rows = [e_m]
    for l in range(l_max + 1):
        p_l = np.empty((l + 1,) + theta.shape)
        if l == 0:
            p_l[0] = 1.0 / np.sqrt(4 * np.pi)
        else:
            for m in range(l - 1):
                a = np.sqrt((4 * l * l - 1.0) / (l * l - m * m))
                b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1.0))
                p_l[m] = a * (ct * p_prev[m] - b * p_prev2[m])
            p_l[l - 1] = np.sqrt(2.0 * l + 1.0) * ct * p_prev[l - 1]
            # diagonal, Condon-Shortley phase included
            p_l[l] = -np.sqrt(1.0 + 0.5 / l) * st * p_prev[l - 1]
            e_rows.append(e_rows[-1] * eiphi)

        y = np.empty((2 * l + 1,) + theta.shape, dtype=complex)
        y[l] = p_l[0]
        for m in range(1, l + 1):
            y[l + m] = p_l[m] * e_rows[m]
            y[l - m] = (-1) ** m * np.conj(y[l + m])
        yield l, y
        p_prev2, p_prev = p_prev, p_l


def sph_harmonics(l_max: int, theta, phi) -> np.ndarray:
    """All ``Y_lm`` up to degree ``l_max``, flat (l, m) ordering.

    Returns shape ``((l_max + 1)**2,) + shape(theta)``.
    """
    theta_arr = np.asarray(theta, dtype=float)
    scalar = theta_arr.ndim == 0
    blocks = [y for _, y in sph_harmonics_blocks(l_max, theta, phi)]
    out = np.concatenate(blocks, axis=0)
    return out[:, 0] if scalar else out
