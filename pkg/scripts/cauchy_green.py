#!/usr/bin/env python3
"""
Cauchy-Green Operators
======================
Discrete Cauchy-Green transform

    T g(z) = (1/pi) * int_D g(zeta) / (z - zeta) dA(zeta)

its z-derivative (the Beurling transform, kernel -1/(pi (z - zeta)^2)) and the
principal-value integral int_D f / (z^2 g) dA.

Midpoint rule on the cell centers; the cell holding the target gets weight 0
(its exact contribution vanishes by symmetry). At the nodes the sums are
convolutions with a cached offset kernel, evaluated by FFT; off-grid targets
are summed row-chunked.
"""

import math
import sys
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict

import numpy as np
from loguru import logger
from scipy import integrate, signal

try:
    from disc_common import CONFIG, HypothesisError, get_path
    from discgrid import (DiscGrid, GridMap, dzbar, make_grid, second_at_zero,
                          gradient_at_zero, value_at_zero)
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent))
    from disc_common import CONFIG, HypothesisError, get_path
    from discgrid import (DiscGrid, GridMap, dzbar, make_grid, second_at_zero,
                          gradient_at_zero, value_at_zero)

CHUNK_ROWS = int(get_path(CONFIG, "cauchy_green.chunk_rows", 512))
CHECK_RADIUS = float(get_path(CONFIG, "cauchy_green.check_radius", 0.75))
MODEL_BLOCK = int(get_path(CONFIG, "cauchy_green.model_block", 4))
ANGULAR_NODES = 64
ARC_NODES = 16


def _kernel(targets: np.ndarray, sources: np.ndarray, kind: str, h: float) -> np.ndarray:
    diff = targets[:, None] - sources[None, :]
    hit = diff == 0
    diff[hit] = 1.0
    if kind == "cauchy":
        K = (h * h / math.pi) / diff
    else:
        K = (-h * h / math.pi) / diff ** 2
    K[hit] = 0.0
    return K


@lru_cache(maxsize=8)
def offset_kernel(N: int, kind: str) -> np.ndarray:
    """Kernel on the (2N-1, 2N-1) lattice of node offsets, zero at offset 0.

    Rows are y-offsets and columns x-offsets, both running from -(N-1) to N-1.
    """
    h = 2.0 / N
    steps = np.arange(-(N - 1), N) * h
    D = steps[None, :] + 1j * steps[:, None]
    logger.debug(f"building {kind} offset kernel for N={N}")
    return _kernel(D.ravel(), np.zeros(1), kind, h).reshape(D.shape)


def _apply(grid: DiscGrid, values: np.ndarray, kind: str, targets: np.ndarray = None) -> np.ndarray:
    flat = values.reshape(values.shape[0], -1)
    if targets is None:
        N = grid.N
        K = offset_kernel(N, kind)
        out = np.empty(flat.shape, dtype=complex)
        square = np.zeros((N, N), dtype=complex)
        for k in range(flat.shape[1]):
            square[grid.iy, grid.ix] = flat[:, k]
            full = signal.fftconvolve(square, K, mode="full")
            out[:, k] = full[N - 1:, N - 1:][grid.iy, grid.ix]
    else:
        tz = np.atleast_1d(np.asarray(targets, dtype=complex))
        out = np.empty((tz.size, flat.shape[1]), dtype=complex)
        for start in range(0, tz.size, CHUNK_ROWS):
            stop = min(start + CHUNK_ROWS, tz.size)
            out[start:stop] = _kernel(tz[start:stop], grid.z, kind, grid.h) @ flat
    return out.reshape((out.shape[0],) + values.shape[1:])


def tcg(g: GridMap) -> GridMap:
    """T_CG g at the nodes."""
    return g.with_values(_apply(g.grid, g.values, "cauchy"))


def beurling(g: GridMap) -> GridMap:
    """d/dz T_CG g at the nodes."""
    return g.with_values(_apply(g.grid, g.values, "beurling"))


def tcg_at(g: GridMap, targets) -> np.ndarray:
    """T_CG g at arbitrary points (e.g. 0), shape (len(targets), n)."""
    return _apply(g.grid, g.values, "cauchy", targets)


def beurling_at(g: GridMap, targets) -> np.ndarray:
    return _apply(g.grid, g.values, "beurling", targets)


def reproduction_error(fn: Callable[[np.ndarray], np.ndarray], N: int,
                       radius: float = CHECK_RADIUS) -> float:
    """max |dzbar(T g) - g| over interior nodes with |z| <= radius."""
    grid = make_grid(N)
    g = GridMap.from_function(grid, fn)
    err = np.abs(dzbar(tcg(g)) - g.values).max(axis=1)
    mask = grid.interior & grid.inside(radius)
    return float(err[mask].max())


CLOSED_FORMS: Dict[str, tuple] = {
    "T(1)": ("cauchy", lambda z: np.ones_like(z), lambda z: np.conj(z)),
    "T(zeta)": ("cauchy", lambda z: z, lambda z: np.abs(z) ** 2 - 1.0),
    "T(conj zeta)": ("cauchy", lambda z: np.conj(z), lambda z: np.conj(z) ** 2 / 2),
    "T(|zeta|^2)": ("cauchy", lambda z: np.abs(z) ** 2, lambda z: z * np.conj(z) ** 2 / 2),
    "S(1)": ("beurling", lambda z: np.ones_like(z), lambda z: np.zeros_like(z)),
    "S(|zeta|^2)": ("beurling", lambda z: np.abs(z) ** 2, lambda z: np.conj(z) ** 2 / 2),
}


def closed_form_errors(N: int, radius: float = CHECK_RADIUS) -> Dict[str, float]:
    """Max errors against the closed forms on |z| <= radius."""
    grid = make_grid(N)
    mask = grid.inside(radius)
    out = {}
    for name, (kind, source, exact) in CLOSED_FORMS.items():
        g = GridMap.from_function(grid, source)
        approx = tcg(g) if kind == "cauchy" else beurling(g)
        out[name] = float(np.abs(approx.values[:, 0] - exact(grid.z))[mask].max())
    return out


# ---------------------------------------------------------------------------
# Principal-value integral
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CZResult:
    """PV value of int_D f/(z^2 g) with its split at |z| = delta/4."""

    value: complex
    inner: complex
    outer: complex
    split_radius: float
    delta: float


class _QuadraticModel:
    """Second-order Taylor model of a scalar grid map at 0."""

    def __init__(self, m: GridMap):
        h = m.grid.h
        fx, fy = (d[0] for d in gradient_at_zero(m))
        fxx, fxy, fyy = (d[0] for d in second_at_zero(m))
        c0 = value_at_zero(m)[0] - h * h / 8.0 * (fxx + fyy)
        self.coef = np.array([c0, fx, fy, fxx / 2, fxy, fyy / 2])

    def __call__(self, x, y, coef=None):
        c = self.coef if coef is None else coef
        return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y


def _model_integrand(fm: _QuadraticModel, gm: _QuadraticModel):
    ratio0 = fm.coef[0] / gm.coef[0]
    numerator = fm.coef - ratio0 * gm.coef
    numerator[0] = 0.0

    def F(r, theta):
        x, y = r * np.cos(theta), r * np.sin(theta)
        z = x + 1j * y
        return fm(x, y, numerator) / (z * z * gm(x, y))

    return F


def _angular(F, r: float, block: float) -> complex:
    if r <= block:
        theta = 2 * math.pi * np.arange(ANGULAR_NODES) / ANGULAR_NODES
        return complex(2 * math.pi / ANGULAR_NODES * np.sum(F(r, theta)))
    lo, hi = math.acos(block / r), math.asin(min(1.0, block / r))
    if hi <= lo:
        return 0j
    t, w = np.polynomial.legendre.leggauss(ARC_NODES)
    base = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    total = 0j
    for quarter in range(4):
        total += 0.5 * (hi - lo) * np.sum(w * F(r, base + quarter * math.pi / 2))
    return complex(total)


def cz_integral(f: GridMap, g: GridMap, model_block: int = MODEL_BLOCK) -> CZResult:
    """PV int_D f/(z^2 g) dA for scalar maps with 0 < |g| <= 1/2 and |f| <= |g|.

    Outside a (2k)x(2k)-cell block around 0 the midpoint rule is used; inside
    the block a quadratic model of f and g is integrated in polar form, angle
    first.
    """
    grid = f.grid
    fv, gv = f.values[:, 0], g.values[:, 0]
    if np.any(np.abs(gv) == 0):
        raise HypothesisError("g vanishes at a node")
    if np.any(np.abs(gv) > 0.5 * (1 + 1e-9)):
        raise HypothesisError(f"sup|g| = {np.abs(gv).max():.3g} exceeds 1/2")
    if np.any(np.abs(fv) > np.abs(gv) * (1 + 1e-9)):
        bad = grid.z[np.argmax(np.abs(fv) - np.abs(gv))]
        raise HypothesisError(f"|f| > |g| at z = {bad:.4g}")

    fm, gm = _QuadraticModel(f), _QuadraticModel(g)
    delta = float(abs(gm.coef[0]))
    split = delta / 4.0
    block = model_block * grid.h
    F = _model_integrand(fm, gm)

    edges = sorted({0.0, block, math.sqrt(2) * block} | ({split} if split < math.sqrt(2) * block else set()))
    inner = outer = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        part, _ = integrate.quad(lambda r: r * _angular(F, r, block), a, b,
                                 complex_func=True, limit=200)
        if b <= split:
            inner += part
        else:
            outer += part

    z = grid.z
    far = np.maximum(np.abs(z.real), np.abs(z.imag)) > block
    terms = grid.h ** 2 * fv[far] / (z[far] ** 2 * gv[far])
    near_split = np.abs(z[far]) <= split
    inner += complex(terms[near_split].sum())
    outer += complex(terms[~near_split].sum())
    return CZResult(value=inner + outer, inner=inner, outer=outer, split_radius=split, delta=delta)
