#!/usr/bin/env python3
"""
Tests for psh_levi.py - Levi forms, pull-back identity, Chirka's function
and the Frobenius-type defect
"""

import sys
from pathlib import Path

# Add scripts to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

import numpy as np
import pytest

from disc_common import DomainError, HypothesisError
from discgrid import GridMap, make_grid
from disc_solver import solve_from_holomorphic
from experiments import make_r6_disc, seed_from_polys
from geometry import VectorFieldExpr, affine_pullback, dilate, load_structure, make_r6, make_standard
from psh_levi import (ScalarField, chirka_check, chirka_samples, coordinate_function, ddc_form, ddc_levi,
                      dist_sq_levi, frobenius_defect, is_complex_tangent, norm_squared, pullback_check)


def _standard_quadratic(grid):
    u = GridMap(grid, np.stack([grid.z, grid.z ** 2 / 2], axis=1))
    return make_standard(2), norm_squared(2), u


def _r6_height(grid):
    return make_r6(), coordinate_function(3, "y3"), make_r6_disc("I*z**2", "z**2", "I", grid)


def _perturbed_solved(grid):
    J = load_structure("chirka-perturbed(0.05)")
    h, dh = seed_from_polys(grid, ["0.5*z", "0.25*z**2"])
    u, _ = solve_from_holomorphic(J, h, dh=dh)
    return J, norm_squared(2), u


PULLBACK_CASES = {
    "standard-quadratic": _standard_quadratic,
    "r6-height": _r6_height,
    "perturbed-solved": _perturbed_solved,
}


def _pullback_case(name, N):
    return PULLBACK_CASES[name](make_grid(N))


class TestLevi:
    """Test dd^c on the standard structure"""

    def test_linear_function_is_pluriharmonic(self):
        """dd^c x1 = 0 for J_st"""
        J = make_standard(2)
        lam = coordinate_function(2, "x1")
        rng = np.random.default_rng(1)
        Y, T = rng.normal(size=(2, 4))
        assert abs(ddc_form(J, lam, rng.normal(size=4), Y, T)) <= 1e-12

    def test_norm_squared_levi(self):
        """dd^c |Z|^2 (Y, J_st Y) = 4 |Y|^2"""
        J = make_standard(2)
        lam = norm_squared(2)
        rng = np.random.default_rng(2)
        for _ in range(5):
            p, Y = rng.normal(size=(2, 4))
            assert ddc_levi(J, lam, p, Y) == pytest.approx(4 * Y @ Y, rel=1e-10)

    def test_antisymmetric(self):
        """dd^c lambda (Y, T) = -dd^c lambda (T, Y)"""
        J = make_r6()
        lam = norm_squared(3)
        rng = np.random.default_rng(3)
        p, Y, T = rng.uniform(-0.5, 0.5, size=(3, 6))
        assert ddc_form(J, lam, p, Y, T) == pytest.approx(-ddc_form(J, lam, p, T, Y), abs=1e-10)

    def test_dist_sq_levi_standard(self):
        """Levi form of |Z - p|^2 is 4|Y|^2 for J_st at any q"""
        J = make_standard(1)
        Y = np.array([0.3, -0.4])
        val = dist_sq_levi(J, np.array([0.1, 0.2]), np.array([0.5, -0.5]), Y)
        assert val == pytest.approx(4 * 0.25, rel=1e-10)


class TestScalarField:
    """Test scalar fields"""

    def test_fd_fallback(self):
        """Without exact derivatives, gradient and Hessian use differences"""
        lam = ScalarField(n=1, value=lambda P: P[:, 0] ** 2 + 3 * P[:, 1] ** 2)
        p = np.array([[0.2, -0.1]])
        assert np.allclose(lam.gradient_many(p), [[0.4, -0.6]], atol=1e-6)
        assert np.allclose(lam.hessian_many(p), [[[2.0, 0.0], [0.0, 6.0]]], atol=1e-5)

    def test_domain_checked(self):
        """Points outside the declared box raise DomainError"""
        lam = ScalarField.from_expression("x1", 1, domain=(-1, 1))
        with pytest.raises(DomainError):
            lam.eval_many(np.array([[2.0, 0.0]]))


class TestPullback:
    """Test Laplacian(lambda o u) = dd^c lambda (u_x, J u_x)"""

    def test_standard_quadratic_disc(self):
        """u = (z, z^2/2) and lambda = |Z|^2 agree to O(h^2)"""
        grid = make_grid(32)
        u = GridMap(grid, np.stack([grid.z, grid.z ** 2 / 2], axis=1))
        report = pullback_check(make_standard(2), norm_squared(2), u)
        assert report.nodes > 0
        assert report.maxdiff < 2e-2
        assert report.rhs_max >= 4.0

    @pytest.mark.parametrize("case", list(PULLBACK_CASES))
    def test_identity_at_n128(self, case):
        """Laplacian and dd^c side agree within 5e-2 on |z| <= 3/4"""
        J, lam, u = _pullback_case(case, 128)
        report = pullback_check(J, lam, u, radius=0.75)
        assert report.nodes > 0
        assert report.maxdiff <= 5e-2

    def test_r6_height_is_harmonic(self):
        """lambda = y3 along an r6 disc: both sides vanish"""
        J, lam, u = _pullback_case("r6-height", 128)
        report = pullback_check(J, lam, u, radius=0.75)
        assert report.lhs_max <= 5e-2
        assert report.rhs_max <= 5e-2

    @pytest.mark.slow
    @pytest.mark.parametrize("case", list(PULLBACK_CASES))
    def test_identity_refines(self, case):
        """maxdiff decreases from N=128 to N=256"""
        coarse = pullback_check(*_pullback_case(case, 128), radius=0.75)
        fine = pullback_check(*_pullback_case(case, 256), radius=0.75)
        assert fine.maxdiff < coarse.maxdiff

    def test_rejects_non_holomorphic(self):
        """A non J-holomorphic map is rejected"""
        grid = make_grid(32)
        u = GridMap.from_function(grid, np.conj)
        with pytest.raises(HypothesisError):
            pullback_check(make_standard(1), norm_squared(1), u)


class TestChirka:
    """Test the Chirka function check"""

    def test_standard_log_norm_psh(self):
        """log|Z| is plurisubharmonic for J_st"""
        samples = chirka_samples(2, 200, seed=4)
        assert chirka_check(make_standard(2), 0.0, samples) >= -1e-8

    def test_dilated_r6(self):
        """log|Z| + 10|Z| is psh for r6 dilated by 0.02"""
        J = dilate(make_r6(), 0.02)
        samples = chirka_samples(3, 500, seed=0)
        assert chirka_check(J, 10.0, samples) >= 0.0

    def test_samples_in_shell(self):
        """Samples respect the radii and have unit Y"""
        Z, Y = chirka_samples(2, 100, r_min=0.1, r_max=0.3, seed=5)
        r = np.linalg.norm(Z, axis=1)
        assert np.all((r >= 0.1 - 1e-12) & (r <= 0.3 + 1e-12))
        assert np.allclose(np.linalg.norm(Y, axis=1), 1.0)

    def test_origin_rejected(self):
        """A sample at Z = 0 is rejected"""
        Z, Y = np.zeros((1, 4)), np.ones((1, 4))
        with pytest.raises(HypothesisError):
            chirka_check(make_standard(2), 1.0, (Z, Y))

    def test_needs_standard_at_origin(self):
        """J(0) != J_st is rejected"""
        J = affine_pullback(make_r6(), np.array([0.5, 0.0, 0.0, 0.0, 0.0, 0.0]), 1.0)
        with pytest.raises(HypothesisError):
            chirka_check(J, 1.0, chirka_samples(3, 10, seed=6))


class TestFrobenius:
    """Test complex tangency and the bracket pairing"""

    def test_complex_tangent(self):
        """dx1 is complex tangent to {y2 = 0}; dx2 is not"""
        J = make_standard(2)
        rho = coordinate_function(2, "y2")
        assert is_complex_tangent(J, rho, np.zeros(4), np.eye(4)[0])
        assert not is_complex_tangent(J, rho, np.zeros(4), np.eye(4)[2])

    def test_r6_defaults(self):
        """rho = y3, Y = dx1, T = dx2 + x1 dx3: pairing 1 and dd^c equal to it"""
        J = make_r6()
        rho = coordinate_function(3, "y3")
        Y = VectorFieldExpr.from_strings(["1", "0", "0", "0", "0", "0"], 3)
        T = VectorFieldExpr.from_strings(["0", "0", "1", "0", "x1", "0"], 3)
        res = frobenius_defect(J, rho, np.zeros(6), Y, T)
        assert res.bracket_pairing == pytest.approx(1.0, abs=1e-10)
        assert abs(res.ddc - res.bracket_pairing) <= 1e-5
        assert ddc_form(J, rho, np.zeros(6), Y, T) == pytest.approx(res.ddc, abs=1e-5)

    def test_standard_levi_flat(self):
        """J_st with rho = x1 is Levi flat: both terms vanish"""
        J = make_standard(2)
        rho = coordinate_function(2, "x1")
        Y = VectorFieldExpr.from_strings(["0", "0", "1", "0"], 2)
        T = VectorFieldExpr.from_strings(["0", "0", "y1", "1 + x2"], 2)
        res = frobenius_defect(J, rho, np.array([0.0, 0.3, 0.2, -0.1]), Y, T)
        assert abs(res.ddc) <= 1e-8
        assert abs(res.bracket_pairing) <= 1e-8

    def test_non_tangent_rejected(self):
        """Fields leaving the complex tangent space are rejected"""
        J = make_r6()
        rho = coordinate_function(3, "y3")
        Y = VectorFieldExpr.from_strings(["0", "0", "0", "0", "1", "0"], 3)
        T = VectorFieldExpr.from_strings(["1", "0", "0", "0", "0", "0"], 3)
        with pytest.raises(HypothesisError):
            frobenius_defect(J, rho, np.zeros(6), Y, T)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
