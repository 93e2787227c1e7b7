"""Sphere quadrature, projection/synthesis round trips, conjugation."""

import numpy as np
import pytest

from randsource.specfun import flat_index, flat_size
from randsource.sphere import conjugate_coeffs, project, sphere_grid, synthesize


def test_surface_area():
    sg = sphere_grid(6, 4.0)
    ones = np.ones(sg.shape)
    assert sg.integrate(ones) == pytest.approx(4 * np.pi * 16.0, rel=1e-13)


def test_project_synthesize_round_trip():
    l_max, radius = 12, 4.0
    sg = sphere_grid(l_max, radius)
    rng = np.random.default_rng(3)
    coeffs = rng.standard_normal(flat_size(l_max)) + 1j * rng.standard_normal(flat_size(l_max))
    values = synthesize(sg, coeffs)
    back = project(sg, values, l_max)
    assert np.abs(back - coeffs).max() < 1e-12


def test_parseval():
    l_max, radius = 9, 2.5
    sg = sphere_grid(l_max, radius)
    rng = np.random.default_rng(4)
    coeffs = rng.standard_normal(flat_size(l_max)) + 1j * rng.standard_normal(flat_size(l_max))
    values = synthesize(sg, coeffs)
    # e_lm orthonormal in L^2(S_R): surface integral of |f|^2 = sum |c|^2
    assert sg.integrate(np.abs(values) ** 2) == pytest.approx(np.sum(np.abs(coeffs) ** 2), rel=1e-12)


def test_conjugate_coeffs():
    l_max = 7
    sg = sphere_grid(l_max, 1.0)
    rng = np.random.default_rng(5)
    coeffs = rng.standard_normal(flat_size(l_max)) + 1j * rng.standard_normal(flat_size(l_max))
    direct = project(sg, np.conj(synthesize(sg, coeffs)), l_max)
    assert np.abs(direct - conjugate_coeffs(coeffs)).max() < 1e-12


def test_points_on_sphere():
    sg = sphere_grid(5, 3.0)
    pts = sg.points()
    assert pts.shape == (*sg.shape, 3)
    assert np.allclose(np.linalg.norm(pts, axis=-1), 3.0)


def test_project_shape_validation():
    sg = sphere_grid(4, 1.0)
    with pytest.raises(ValueError):
        project(sg, np.zeros((2, 2)), 4)
    with pytest.raises(ValueError):
        project(sg, np.zeros(sg.shape), 10)  # azimuth grid too coarse


def test_single_mode_localization():
    l_max = 6
    sg = sphere_grid(l_max, 1.0)
    coeffs = np.zeros(flat_size(l_max), dtype=complex)
    coeffs[flat_index(3, -2)] = 1.0
    back = project(sg, synthesize(sg, coeffs), l_max)
    assert back[flat_index(3, -2)] == pytest.approx(1.0, abs=1e-13)
    back[flat_index(3, -2)] = 0.0
    assert np.abs(back).max() < 1e-13
