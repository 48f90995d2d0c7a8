#!/usr/bin/env python3
"""
Tests for cauchy_green.py - Cauchy-Green transform, Beurling transform and
the principal-value integral
"""

import sys
from pathlib import Path

# Add scripts to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

import numpy as np
import pytest

from cauchy_green import (CLOSED_FORMS, beurling, beurling_at, closed_form_errors, cz_integral,
                          reproduction_error, tcg, tcg_at)
from disc_common import HypothesisError
from discgrid import GridMap, make_grid

REPRODUCTION_FAMILY = {
    "1": np.ones_like,
    "zeta": lambda z: z,
    "conj zeta^2": lambda z: np.conj(z) ** 2,
    "|zeta|^2": lambda z: np.abs(z) ** 2,
}


class TestTransform:
    """Test T_CG on closed forms"""

    def test_tcg_of_one(self):
        """T(1) = conj z on |z| <= 3/4"""
        grid = make_grid(64)
        g = GridMap.from_function(grid, np.ones_like)
        mask = grid.inside(0.75)
        err = np.abs(tcg(g).values[:, 0] - np.conj(grid.z))[mask].max()
        assert err < 5e-2

    def test_beurling_of_one(self):
        """S(1) = 0 on |z| <= 3/4"""
        grid = make_grid(64)
        g = GridMap.from_function(grid, np.ones_like)
        mask = grid.inside(0.75)
        assert np.abs(beurling(g).values[mask, 0]).max() < 0.1

    def test_linear_in_density(self):
        """T is linear and acts componentwise"""
        grid = make_grid(32)
        a = GridMap.from_function(grid, lambda z: z)
        b = GridMap.from_function(grid, np.conj)
        both = GridMap(grid, np.stack([a.values[:, 0], b.values[:, 0]], axis=1))
        out = tcg(both).values
        assert np.allclose(out[:, 0], tcg(a).values[:, 0])
        assert np.allclose(out[:, 1], tcg(b).values[:, 0])

    @pytest.mark.parametrize("kind", ["cauchy", "beurling"])
    def test_node_transform_matches_direct_sums(self, kind):
        """Convolution at the nodes equals the direct node sums of tcg_at / beurling_at"""
        grid = make_grid(32)
        g = GridMap(grid, np.stack([1 + grid.z, np.abs(grid.z) ** 2 - 0.3j * np.conj(grid.z)], axis=1))
        if kind == "cauchy":
            nodes, direct = tcg(g).values, tcg_at(g, grid.z)
        else:
            nodes, direct = beurling(g).values, beurling_at(g, grid.z)
        assert np.allclose(nodes, direct, rtol=0, atol=1e-12)

    def test_odd_size_grid(self):
        """A grid with an odd number of cells per radius (N = 34) agrees with the direct sums too"""
        grid = make_grid(34)
        g = GridMap.from_function(grid, lambda z: z * np.conj(z) + 2j * z)
        assert np.allclose(tcg(g).values, tcg_at(g, grid.z), rtol=0, atol=1e-12)

    def test_tcg_at_origin(self):
        """T(1)(0) = 0 by symmetry of the grid"""
        grid = make_grid(32)
        g = GridMap.from_function(grid, np.ones_like)
        assert abs(tcg_at(g, [0.0])[0, 0]) < 1e-10


class TestReproduction:
    """Test dzbar(T g) = g"""

    def test_reproduction_improves_with_n(self):
        """Reproduction error of a smooth density decreases with N"""
        fn = lambda z: np.abs(z) ** 2 + z
        e32, e64 = reproduction_error(fn, 32), reproduction_error(fn, 64)
        assert e64 < e32
        assert e64 < 0.1

    def test_closed_form_table(self):
        """All closed forms are within 5e-2 at N=128"""
        errs = closed_form_errors(128)
        assert set(errs) == set(CLOSED_FORMS)
        assert max(errs.values()) <= 5e-2
        assert errs["T(1)"] <= 5e-2
        assert errs["T(zeta)"] <= 5e-2

    @pytest.mark.parametrize("name", list(REPRODUCTION_FAMILY))
    def test_reproduction_family(self, name):
        """dzbar(T g) = g within 5e-2 at N=128"""
        assert reproduction_error(REPRODUCTION_FAMILY[name], 128) <= 5e-2

    @pytest.mark.slow
    @pytest.mark.parametrize("name", list(REPRODUCTION_FAMILY))
    def test_reproduction_refines(self, name):
        """N=256 is strictly better than N=128"""
        fn = REPRODUCTION_FAMILY[name]
        assert reproduction_error(fn, 256) < reproduction_error(fn, 128)

    @pytest.mark.slow
    def test_closed_forms_refine(self):
        """Closed-form errors shrink from N=128 to N=256"""
        coarse, fine = closed_form_errors(128), closed_form_errors(256)
        assert fine["T(1)"] < coarse["T(1)"]
        assert fine["T(zeta)"] < coarse["T(zeta)"]
        assert max(fine.values()) < max(coarse.values())


class TestPrincipalValue:
    """Test cz_integral"""

    def test_hypotheses_checked(self):
        """|f| > |g| and sup|g| > 1/2 are rejected"""
        grid = make_grid(32)
        g = GridMap.from_function(grid, lambda z: 0.1 + 0 * z)
        f = GridMap.from_function(grid, lambda z: 0.2 + 0 * z)
        with pytest.raises(HypothesisError):
            cz_integral(f, g)
        big = GridMap.from_function(grid, lambda z: 0.9 + 0 * z)
        with pytest.raises(HypothesisError):
            cz_integral(f, big)

    def test_constant_ratio_vanishes(self):
        """f = c g integrates to ~0 (angular cancellation of 1/z^2)"""
        grid = make_grid(64)
        g = GridMap.from_function(grid, lambda z: 0.25 + 0 * z)
        f = GridMap.from_function(grid, lambda z: 0.1 + 0 * z)
        assert abs(cz_integral(f, g).value) < 1e-2

    def test_split_parts_add_up(self):
        """value = inner + outer and the split radius is delta/4"""
        grid = make_grid(64)
        delta = 0.01
        g = GridMap.from_function(grid, lambda z: delta + np.abs(z) ** 2 / 4)
        f = GridMap.from_function(grid, lambda z: z ** 2 / 4)
        res = cz_integral(f, g)
        assert res.value == pytest.approx(res.inner + res.outer)
        assert res.split_radius == pytest.approx(res.delta / 4, rel=1e-6)
        assert res.delta == pytest.approx(delta, rel=0.05)

    def test_log_growth_family(self):
        """f = z^2/4, g = delta + |z|^2/4 follows pi log(1 + 1/(4 delta))"""
        grid = make_grid(64)
        for delta in (1e-1, 1e-2):
            g = GridMap.from_function(grid, lambda z: delta + np.abs(z) ** 2 / 4)
            f = GridMap.from_function(grid, lambda z: z ** 2 / 4)
            exact = np.pi * np.log(1 + 1 / (4 * delta))
            assert abs(cz_integral(f, g).value - exact) / exact < 0.1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
