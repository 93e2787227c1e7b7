"""CGO pairs, single-layer inversion, representation and Fourier identities."""

import math

import mpmath
import numpy as np
import pytest

from randsource.domain import eval_phantom, make_grid, phantom_random
from randsource.operators import HarmonicCoeffs, MeasurementBasis, build_potential, forward_cov, hs_dist
from randsource.cgo import (
    CgoVector,
    build_cgo_pair,
    cgo_density,
    cgo_field,
    single_layer_eigenvalues,
    single_layer_solve,
    verify_fourier_identity,
    verify_lemma41,
)
from randsource.specfun import flat_index

mpmath.mp.dps = 30


class TestCgoVector:
    def test_invariants_enforced(self):
        pair = build_cgo_pair(np.array([1.0, 0, 0]), t=1.0, kappa=6.0)
        CgoVector(pair.a, 1.0, 6.0)  # valid
        with pytest.raises(ValueError):
            CgoVector(pair.a, 2.0, 6.0)  # wrong t
        with pytest.raises(ValueError):
            CgoVector(pair.a, 1.0, 5.0)  # wrong kappa
        with pytest.raises(ValueError):
            CgoVector(pair.a, -1.0, 6.0)


class TestBuildPair:
    def test_canonical_example(self):
        pair = build_cgo_pair(np.zeros(3), t=1.0, kappa=6.0)
        assert complex(pair.a @ pair.a) == pytest.approx(36.0, rel=1e-14)
        assert np.linalg.norm(pair.a.imag) == pytest.approx(1.0)
        assert np.allclose(pair.a - np.conj(pair.b), 0.0)

    def test_random_invariants(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            kappa = rng.uniform(1.0, 10.0)
            t = rng.uniform(0.1, 3.0)
            bound = 2 * math.sqrt(kappa**2 + t**2)
            gamma = rng.standard_normal(3)
            gamma *= rng.uniform(0, bound) / np.linalg.norm(gamma)
            pair = build_cgo_pair(gamma, t, kappa)
            scale = max(kappa**2, 1.0)
            assert abs(complex(pair.a @ pair.a) - kappa**2) < 1e-12 * scale
            assert abs(complex(pair.b @ pair.b) - kappa**2) < 1e-12 * scale
            assert np.abs(pair.a - np.conj(pair.b) + gamma).max() < 1e-12
            assert abs(np.linalg.norm(pair.a.imag) - t) < 1e-12
            assert abs(np.linalg.norm(pair.b.imag) - t) < 1e-12

    def test_boundary_of_constraint(self):
        kappa, t = 6.0, 1.0
        bound = 2 * math.sqrt(kappa**2 + t**2)
        gamma = np.array([bound, 0.0, 0.0])
        pair = build_cgo_pair(gamma, t, kappa)
        assert abs(complex(pair.a @ pair.a) - kappa**2) < 1e-10

    def test_constraint_violation_message(self):
        with pytest.raises(ValueError, match="2\\*sqrt"):
            build_cgo_pair(np.array([100.0, 0, 0]), t=1.0, kappa=6.0)

    def test_pair_product_is_plane_wave(self):
        gamma = np.array([1.0, -0.7, 0.4])
        pair = build_cgo_pair(gamma, t=1.0, kappa=6.0)
        rng = np.random.default_rng(1)
        x = rng.uniform(-1.5, 1.5, (20, 3))
        lhs = cgo_field(pair.a, x) * np.conj(cgo_field(pair.b, x))
        assert np.abs(lhs - np.exp(-1j * (x @ gamma))).max() < 1e-10

    def test_helmholtz_residual(self):
        """4th-order FD Laplacian: Delta u + kappa^2 u ~ 0."""
        kappa, t = 6.0, 1.0
        pair = build_cgo_pair(np.array([0.0, 2.0, 0.0]), t, kappa)
        xi = pair.a
        h = 1e-3
        rng = np.random.default_rng(2)
        pts = rng.uniform(-1.0, 1.0, (10, 3))
        stencil = [(-2, -1 / 12), (-1, 4 / 3), (0, -5 / 2), (1, 4 / 3), (2, -1 / 12)]
        for x in pts:
            lap = 0.0
            for axis in range(3):
                for off, c in stencil:
                    xs = x.copy()
                    xs[axis] += off * h
                    lap += c * cgo_field(xi, xs[None])[0]
            lap /= h**2
            u = cgo_field(xi, x[None])[0]
            assert abs(lap + kappa**2 * u) <= 1e-6 * abs(u) * (1 + np.linalg.norm(xi) ** 2)


class TestSingleLayer:
    def test_l0_closed_form(self):
        kappa, R = 6.0, 4.0
        basis = MeasurementBasis(kappa=kappa, R=R, L=30)
        sigma = single_layer_eigenvalues(basis)
        x = kappa * R
        ref = 1j * kappa * R**2 * (np.sin(x) / x) * (-1j * np.exp(1j * x) / x)
        assert sigma[0] == pytest.approx(ref, rel=1e-12)

    def test_eigenvalues_against_mpmath(self):
        kappa, R = 6.0, 4.0
        basis = MeasurementBasis(kappa=kappa, R=R, L=40)
        sigma = single_layer_eigenvalues(basis)
        x = mpmath.mpf(kappa) * R
        for l in (0, 5, 17, 33, 40):
            nu = l + mpmath.mpf(1) / 2
            pref = mpmath.sqrt(mpmath.pi / (2 * x))
            jl = pref * mpmath.besselj(nu, x)
            hl = jl + 1j * pref * mpmath.bessely(nu, x)
            ref = complex(1j * kappa * R**2 * jl * hl)
            assert sigma[l] == pytest.approx(ref, rel=1e-10)

    def test_diagonal_action(self):
        basis = MeasurementBasis(kappa=6.0, R=4.0, L=26)
        sigma = single_layer_eigenvalues(basis)
        c = np.zeros(basis.size, dtype=complex)
        c[flat_index(4, -2)] = 2.0
        phi = single_layer_solve(basis, HarmonicCoeffs(basis, c))
        assert phi.c[flat_index(4, -2)] == pytest.approx(2.0 / sigma[4])
        assert np.count_nonzero(phi.c) == 1

    def test_inverse_of_direct_application(self):
        basis = MeasurementBasis(kappa=6.0, R=4.0, L=26)
        sigma = single_layer_eigenvalues(basis)
        rng = np.random.default_rng(3)
        phi = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
        from randsource.specfun import degree_orders

        ls, _ = degree_orders(basis.L)
        g = HarmonicCoeffs(basis, sigma[ls] * phi)  # direct S
        back = single_layer_solve(basis, g)
        assert np.abs(back.c - phi).max() < 1e-8 * np.abs(phi).max()

    def test_dirichlet_eigenvalue_rejected(self):
        # j_0(kappa R) = 0 at kappa R = pi
        basis = MeasurementBasis(kappa=np.pi / 4.0, R=4.0, L=8)
        with pytest.raises(ValueError, match="j_0"):
            single_layer_eigenvalues(basis)

    def test_tail_decay_not_flagged(self):
        # large L: tiny tail values are legitimate, not near-eigenvalues
        basis = MeasurementBasis(kappa=6.0, R=4.0, L=80)
        sigma = single_layer_eigenvalues(basis)
        assert np.all(np.isfinite(sigma))


class TestLemma41:
    def test_representation(self):
        kappa, R, t = 6.0, 4.0, 0.5
        L = math.ceil((kappa + t) * R) + 20
        basis = MeasurementBasis(kappa=kappa, R=R, L=L)
        pair = build_cgo_pair(np.zeros(3), t, kappa)
        rep = verify_lemma41(basis, make_grid(3, 8), CgoVector(pair.a, t, kappa))
        assert rep["rel_error"] <= 1e-6
        assert rep["phi_norm"] > 0
        assert rep["bound_rhs"] == pytest.approx(math.sqrt(1 + t**2 + kappa**2) * math.exp(R * t))

    def test_truncation_precondition(self):
        basis = MeasurementBasis(kappa=6.0, R=4.0, L=25)
        pair = build_cgo_pair(np.zeros(3), 2.0, 6.0)
        with pytest.raises(ValueError, match="too small"):
            verify_lemma41(basis, make_grid(3, 6), CgoVector(pair.a, 2.0, 6.0))


class TestFourierIdentity:
    @pytest.fixture(scope="class")
    @staticmethod
    def setting():
        kappa, R, t = 6.0, 4.0, 1.0
        L = math.ceil((kappa + t) * R) + 20
        basis = MeasurementBasis(kappa=kappa, R=R, L=L)
        grid = make_grid(3, 10)
        P = build_potential(grid, basis)
        q1 = eval_phantom(phantom_random(3, seed=1, dim=3), grid)
        q2 = eval_phantom(phantom_random(3, seed=2, dim=3), grid)
        return P, q1, q2, t

    def test_equal_sources_vanish(self, setting):
        P, q1, q2, t = setting
        rep = verify_fourier_identity(P, q1, q1, np.array([1.0, 0, 0]), t)
        assert rep["lhs"] == 0.0
        assert abs(rep["rhs"]) < 1e-12

    def test_identity_holds(self, setting):
        P, q1, q2, t = setting
        for gamma in (np.zeros(3), np.array([1.0, 0, 0]), np.array([0, 2.0, 0])):
            rep = verify_fourier_identity(P, q1, q2, gamma, t)
            assert rep["rel_error"] <= 1e-5

    def test_uniqueness_probe(self, setting):
        """Identical covariance data forces matching Fourier coefficients."""
        P, q1, q2, t = setting
        kappa, R = P.basis.kappa, P.basis.R
        assert hs_dist(forward_cov(P, q1), forward_cov(P, q1)) < 1e-12
        for gamma in (np.array([1.0, 0, 0]), np.array([0.5, -1.0, 0.7])):
            rep = verify_fourier_identity(P, q1, q1, gamma, t)
            bound = 1e-8 * (1 + t**2 + kappa**2) * math.exp(2 * R * t)
            assert abs(rep["lhs"] - rep["rhs"]) <= bound
