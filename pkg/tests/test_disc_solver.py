#!/usr/bin/env python3
"""
Tests for disc_solver.py - Picard solver, jet and two-point Newton, families
and the linear Cauchy-Riemann problem
"""

import sys
from pathlib import Path

# Add scripts to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

import numpy as np
import pytest

from disc_common import ConfigError, DivergenceError, HypothesisError, SolverSettings
from discgrid import (GridMap, Jet, complex_gradient_at_zero, derivatives, interp, jet_at_zero, make_grid,
                      to_real, value_at_zero)
from disc_solver import (continue_family, gradient_bound_ratio, residual, seed_from_jet, seed_two_point,
                         solve_from_holomorphic, solve_jet, solve_linear_cr, solve_two_point)
from geometry import dilate, load_structure, make_r6, make_standard


@pytest.fixture(scope="module")
def grid():
    return make_grid(32)


@pytest.fixture(scope="module")
def r6_small():
    return dilate(make_r6(), 0.05)


def _line_seed(grid, n):
    values = np.zeros((grid.size, n), dtype=complex)
    values[:, 0] = grid.z
    deriv = np.zeros_like(values)
    deriv[:, 0] = 1.0
    return GridMap(grid, values), deriv


class TestResidual:
    """Test the finite-difference residual"""

    def test_standard_line_is_holomorphic(self, grid):
        """u = (z, 0) has zero residual for J_st"""
        u, _ = _line_seed(grid, 2)
        assert residual(make_standard(2), u) <= 1e-10

    def test_antiholomorphic_detected(self, grid):
        """conj z is far from J_st-holomorphic"""
        u = GridMap.from_function(grid, np.conj)
        assert residual(make_standard(1), u) > 0.5

    def test_gradient_ratio_of_line(self, grid):
        """sup|grad z| on |z| <= 1/2 over sup|z| is about 1"""
        u = GridMap.from_function(grid, lambda z: z)
        assert 1.0 <= gradient_bound_ratio(u) <= 1.1


class TestSeeds:
    """Test holomorphic seeds"""

    def test_jet_seed_values(self, grid):
        """h = q + z w + z^2 w2 / 2 and its derivative"""
        q, w, w2 = np.array([0.1j, 0.0]), np.array([1.0, 0.5]), np.array([0.0, 2.0])
        h, dh = seed_from_jet(grid, q, [w, w2])
        z = grid.z[:, None]
        assert np.allclose(h.values, q + z * w + z ** 2 * w2 / 2)
        assert np.allclose(dh, w + z * w2)

    def test_two_point_seed(self, grid):
        """h(0) = a and h(1/2) = b"""
        a, b = np.array([0.1 + 0.2j]), np.array([0.3 - 0.1j])
        h, _ = seed_two_point(grid, a, b)
        assert np.allclose(value_at_zero(h), a)
        assert np.allclose(interp(h, 0.5), b)


class TestPicard:
    """Test solve_from_holomorphic"""

    def test_standard_returns_seed(self, grid):
        """For J_st the solution is the seed itself"""
        h, dh = _line_seed(grid, 2)
        u, report = solve_from_holomorphic(make_standard(2), h, dh=dh)
        assert report.converged
        assert report.iterations == 1
        assert np.abs(u.values - h.values).max() <= 1e-12

    def test_dilated_r6_converges(self, grid, r6_small):
        """J = dilate(r6, 0.05), h = (z, 0, 0) converges with small residual"""
        h, dh = _line_seed(grid, 3)
        u, report = solve_from_holomorphic(r6_small, h, dh=dh)
        assert report.converged
        assert report.iterations <= 50
        assert report.residual <= 1e-6
        assert report.contraction_estimate < 1.0
        assert residual(r6_small, u, radius=0.75) < 1e-2

    def test_quadratic_seed_converges(self, grid, r6_small):
        """h = (z, z^2/2, 0) converges within 50 iterations to residual 1e-6"""
        z = grid.z
        h = GridMap(grid, np.stack([z, z ** 2 / 2, 0 * z], axis=1))
        dh = np.stack([np.ones_like(z), z, 0 * z], axis=1)
        _, report = solve_from_holomorphic(r6_small, h, dh=dh)
        assert report.converged
        assert report.iterations <= 50
        assert report.residual <= 1e-6

    def test_fd_seed_derivative(self, grid, r6_small):
        """Without dh the seed derivative comes from finite differences"""
        h, dh = _line_seed(grid, 3)
        u1, _ = solve_from_holomorphic(r6_small, h, dh=dh)
        u2, report = solve_from_holomorphic(r6_small, h)
        assert report.converged
        assert np.abs(u1.values - u2.values).max() < 1e-6

    def test_component_mismatch(self, grid, r6_small):
        """Seed dimension must match the structure"""
        h, dh = _line_seed(grid, 2)
        with pytest.raises(HypothesisError):
            solve_from_holomorphic(r6_small, h, dh=dh)

    def test_non_holomorphic_seed(self, grid):
        """An antiholomorphic seed is rejected when dh is not given"""
        h = GridMap.from_function(grid, np.conj)
        with pytest.raises(HypothesisError):
            solve_from_holomorphic(make_standard(1), h)

    def test_budget_exhausted_without_progress(self, grid, r6_small):
        """Running out of iterations before the update halves is a divergence"""
        h, dh = _line_seed(grid, 3)
        settings = SolverSettings.from_config({"solver": {"max_iterations": 1}})
        with pytest.raises(DivergenceError):
            solve_from_holomorphic(r6_small, h, dh=dh, settings=settings)

    def test_warm_start_needs_fewer_iterations(self, grid, r6_small):
        """Warm start from the converged density finishes immediately"""
        h, dh = _line_seed(grid, 3)
        _, cold = solve_from_holomorphic(r6_small, h, dh=dh)
        _, warm = solve_from_holomorphic(r6_small, h, dh=dh, warm=cold.density)
        assert warm.iterations < cold.iterations


class TestJetAndTwoPoint:
    """Test the Newton wrappers"""

    def test_one_jet(self, grid, r6_small):
        """k=1, p=0, v1=e1 is matched"""
        target = Jet(1, np.zeros(6), (np.eye(6)[0],))
        u, report = solve_jet(r6_small, target, grid)
        jet = jet_at_zero(u, 1)
        assert np.abs(jet.p).max() <= 1e-6
        assert np.abs(jet.v[0] - np.eye(6)[0]).max() <= 1e-4
        assert report.jet_error <= 1e-6

    def test_two_jet(self, grid):
        """A 2-jet for a perturbed structure on C^2"""
        J = dilate(load_structure("chirka-perturbed(0.05)"), 0.5)
        v1 = np.array([0.3, 0.0, 0.0, 0.1])
        v2 = np.array([0.0, 0.0, 0.2, 0.0])
        u, _ = solve_jet(J, Jet(2, np.zeros(4), (v1, v2)), grid)
        jet = jet_at_zero(u, 2)
        assert np.abs(jet.v[0] - v1).max() <= 1e-4
        assert np.abs(jet.v[1] - v2).max() <= 1e-4

    def test_zero_jet_is_constant(self, grid, r6_small):
        """v = 0 gives the constant disc"""
        p = np.array([0.1, 0.0, 0.0, 0.2, 0.0, 0.0])
        u, report = solve_jet(r6_small, Jet(1, p, (np.zeros(6),)), grid)
        assert np.allclose(u.real, p)
        assert report.iterations == 0

    def test_jet_dimension_checked(self, grid, r6_small):
        """A jet in the wrong dimension is rejected"""
        with pytest.raises(HypothesisError):
            solve_jet(r6_small, Jet(1, np.zeros(4), (np.ones(4),)), grid)

    def test_two_point(self, grid, r6_small):
        """u(0) = 0 and u(1/2) = 0.1 e1"""
        q = 0.1 * np.eye(6)[0]
        u, _ = solve_two_point(r6_small, np.zeros(6), q, grid)
        assert np.abs(to_real(value_at_zero(u))).max() <= 1e-6
        assert np.abs(to_real(interp(u, 0.5)) - q).max() <= 1e-4


class TestFamily:
    """Test continuation"""

    @staticmethod
    def _family(grid, ts):
        z = grid.z
        seeds, derivs = [], []
        for t in ts:
            seeds.append(GridMap(grid, np.stack([z, t + 1j * z ** 2], axis=1)))
            derivs.append(np.stack([np.ones_like(z), 2j * z], axis=1))
        return seeds, derivs

    def test_family_within_eta(self, grid):
        """phi_t = (z, t + i z^2) continues within eta = 0.05"""
        J = dilate(load_structure("chirka-perturbed(0.05)"), 0.05)
        seeds, derivs = self._family(grid, [0.0, 0.05, 0.1])
        discs = continue_family(J, seeds, 0.05, derivatives=derivs)
        assert len(discs) == 3
        for phi, psi in zip(seeds, discs):
            assert np.abs(psi.values - phi.values).max() <= 0.05

    def test_family_eta_violation(self, grid):
        """A tiny eta is a continuation failure"""
        J = dilate(load_structure("chirka-perturbed(0.05)"), 0.05)
        seeds, derivs = self._family(grid, [0.0, 0.05])
        with pytest.raises(DivergenceError):
            continue_family(J, seeds, 1e-9, derivatives=derivs)


class TestLinearCR:
    """Test solve_linear_cr"""

    def test_small_coefficients(self, grid):
        """f_zbar + B1 f + B2 conj f = g with g(0) = 0"""
        rng = np.random.default_rng(11)
        B1 = GridMap(grid, np.full((grid.size, 1, 1), 0.05 * complex(*rng.normal(size=2))))
        B2 = GridMap(grid, np.full((grid.size, 1, 1), 0.05 * complex(*rng.normal(size=2))))
        g = GridMap.from_function(grid, np.conj)
        f, report = solve_linear_cr(B1, B2, g, with_report=True)
        assert report.converged
        assert report.residual <= 1e-4
        assert np.abs(value_at_zero(f)).max() <= 1e-10

    def test_equation_holds_by_finite_differences(self):
        """Recomputed f_zbar + B1 f + B2 conj f - g is small inside, and f_z(0) = 0"""
        fine = make_grid(64)
        z = fine.z
        B1 = GridMap(fine, (0.1 * z)[:, None, None])
        B2 = GridMap(fine, np.full((fine.size, 1, 1), 0.05 - 0.03j))
        g = GridMap.from_function(fine, lambda w: np.conj(w) + 0.5 * w * np.conj(w))
        f, report = solve_linear_cr(B1, B2, g, with_report=True)
        assert report.converged
        fz, fzbar, _, valid = derivatives(f)
        defect = (fzbar.values[:, 0] + B1.values[:, 0, 0] * f.values[:, 0]
                  + B2.values[:, 0, 0] * np.conj(f.values[:, 0]) - g.values[:, 0])
        mask = valid & fine.inside(0.75)
        assert np.abs(defect[mask]).max() <= 2e-2
        a, abar = complex_gradient_at_zero(f)
        assert abs(a[0]) <= 1e-10
        assert abs(abar[0]) <= 1e-2
        assert np.abs(value_at_zero(f)).max() <= 1e-10

    def test_zero_coefficients_integrate_g(self):
        """With B = 0 and g = conj z the solution is conj(z)^2 / 2"""
        fine = make_grid(64)
        zero = GridMap(fine, np.zeros((fine.size, 1, 1)))
        f = solve_linear_cr(zero, zero, GridMap.from_function(fine, np.conj))
        mask = fine.inside(0.75)
        exact = np.conj(fine.z) ** 2 / 2
        assert np.abs(f.values[mask, 0] - exact[mask]).max() <= 2e-2

    def test_budget_exhausted_without_progress(self, grid):
        """One allowed iteration is not enough and raises DivergenceError"""
        B = GridMap(grid, np.full((grid.size, 1, 1), 0.05 + 0.0j))
        g = GridMap.from_function(grid, np.conj)
        settings = SolverSettings.from_config({"solver": {"max_iterations": 1}})
        with pytest.raises(DivergenceError):
            solve_linear_cr(B, B, g, settings=settings)

    def test_requires_vanishing_g0(self, grid):
        """g(0) != 0 is rejected"""
        zero = GridMap(grid, np.zeros((grid.size, 1, 1)))
        g = GridMap.from_function(grid, lambda z: 1 + 0 * z)
        with pytest.raises(HypothesisError):
            solve_linear_cr(zero, zero, g)


class TestSettings:
    """Test solver settings"""

    def test_from_config(self):
        """Values from the solver section override defaults"""
        s = SolverSettings.from_config({"solver": {"tol": 1e-6, "max_iterations": 7}})
        assert s.tol == 1e-6
        assert s.max_iterations == 7

    def test_bad_values(self):
        """Non-numeric or non-positive tolerances raise ConfigError"""
        with pytest.raises(ConfigError):
            SolverSettings.from_config({"solver": {"tol": -1.0}})
        with pytest.raises(ConfigError):
            SolverSettings.from_config({"solver": {"max_iterations": "many"}})


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
