#!/usr/bin/env python3
"""
Kobayashi Bounds
================
Upper bounds for the Kobayashi-Royden norm from explicit discs, path-length
upper bounds, and lower distance certificates from a divergence gauge

    d_K(p, q) >= (1/2) * int_{chi(q)}^{chi(p)} ds / delta(s)

when |grad chi(u(0))| <= delta(|chi(u(0))|) holds along every J-disc.

Norm normalization: the disc z -> t z Y in the unit disc gives ||Y|| = 1/t,
so the Kobayashi distance of the unit disc is artanh|(a - b)/(1 - conj(a) b)|.
"""

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import integrate

try:
    from disc_common import (CONFIG, ConfigError, DivergenceError, DomainError, HypothesisError,
                             SolverSettings, get_path)
    from discgrid import DiscGrid, GridMap, Jet, make_grid
    from disc_solver import solve_jet
    from geometry import StructureField
    from psh_levi import ScalarField
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent))
    from disc_common import (CONFIG, ConfigError, DivergenceError, DomainError, HypothesisError,
                             SolverSettings, get_path)
    from discgrid import DiscGrid, GridMap, Jet, make_grid
    from disc_solver import solve_jet
    from geometry import StructureField
    from psh_levi import ScalarField

T_START = float(get_path(CONFIG, "kobayashi.t_start", 0.125))
BUDGET = int(get_path(CONFIG, "kobayashi.budget", 24))
KOBAYASHI_N = int(get_path(CONFIG, "kobayashi.grid_N", 32))

Inside = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DivergenceGauge:
    """delta(t) = C t (linear), C t log(1/t) (loglinear) or a custom function."""

    kind: str
    C: float
    fn: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind not in ("linear", "loglinear", "custom"):
            raise HypothesisError(f"unknown gauge kind {self.kind!r}")
        if self.kind != "custom" and not self.C > 0:
            raise HypothesisError("gauge constant must be positive")
        if self.kind == "custom" and self.fn is None:
            raise HypothesisError("custom gauge needs a function")

    def delta(self, t: float) -> float:
        if self.kind == "linear":
            return self.C * t
        if self.kind == "loglinear":
            return self.C * t * math.log(1.0 / t)
        return float(self.fn(t))


@dataclass(frozen=True)
class NormBound:
    """Upper bound 1/t for ||Y||_K from the largest accepted disc scale t."""

    value: float
    accepted_t: float
    witness: Optional[GridMap]
    solves: int


@dataclass(frozen=True)
class DistanceCertificate:
    lower_bound: float
    gauge: DivergenceGauge
    chi_near: float
    chi_far: float
    method: str


@dataclass(frozen=True)
class PathSample:
    """Ordered points of a path in R^{2n}."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 2:
            raise HypothesisError("a path needs at least two points")
        object.__setattr__(self, "points", pts)

    @property
    def segments(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(midpoint, chord) per segment."""
        p = self.points
        return [(0.5 * (p[i] + p[i + 1]), p[i + 1] - p[i]) for i in range(len(p) - 1)]


# ---------------------------------------------------------------------------
# Containment predicates
# ---------------------------------------------------------------------------

def everywhere() -> Inside:
    return lambda pts: np.ones(np.atleast_2d(pts).shape[0], dtype=bool)


def ball(center: Sequence[float], radius: float) -> Inside:
    c = np.asarray(center, dtype=float)
    return lambda pts: np.linalg.norm(np.atleast_2d(pts) - c, axis=1) < radius


def sublevel(rho: ScalarField, level: float = 0.0) -> Inside:
    """{rho < level}."""
    return lambda pts: rho.eval_many(pts) < level


def polydisc_punctured(n: int, radius: float = 1.0) -> Inside:
    """|z_j| < radius for all j and z_n != 0."""
    def inside(pts):
        pts = np.atleast_2d(pts)
        mod = np.hypot(pts[:, 0::2], pts[:, 1::2])
        return np.all(mod < radius, axis=1) & (mod[:, n - 1] > 0)

    return inside


def winding_number(m: GridMap, k: int = 0) -> int:
    """Winding of component k around 0 along the outermost ring of nodes."""
    g = m.grid
    r = np.abs(g.z)
    ring = np.nonzero(r >= r.max() - 1.5 * g.h)[0]
    ring = ring[np.argsort(np.angle(g.z[ring]))]
    vals = m.values[ring, k]
    if np.any(vals == 0):
        return 1
    steps = np.angle(np.roll(vals, -1) / vals)
    return int(round(steps.sum() / (2 * math.pi)))


def nonvanishing(k: int) -> Callable[[GridMap], bool]:
    """Disc check: component k has no zero on the nodes and winds 0 times."""
    return lambda u: bool(np.all(u.values[:, k] != 0) and winding_number(u, k) == 0)


def parse_inside(spec: str, n: int) -> Inside:
    """'everywhere', 'ball:R', 'sublevel:<expr in x1, y1, ...>' or 'polydisc-punctured[:R]'."""
    kind, _, arg = str(spec).partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "everywhere":
            return everywhere()
        if kind == "ball":
            return ball(np.zeros(2 * n), float(arg or 1.0))
        if kind == "sublevel":
            return sublevel(ScalarField.from_expression(arg, n))
        if kind == "polydisc-punctured":
            return polydisc_punctured(n, float(arg or 1.0))
    except ValueError as e:
        raise ConfigError(f"bad domain spec {spec!r}: {e}") from e
    raise ConfigError(f"unknown domain {spec!r}; use everywhere, ball:R, sublevel:<expr>, polydisc-punctured")


def poincare_distance(a: complex, b: complex) -> float:
    """Kobayashi distance of the unit disc in the 1/t normalization."""
    return float(math.atanh(abs((a - b) / (1 - np.conj(a) * b))))


def poincare_length(points: Sequence[complex]) -> float:
    """Length of a polygonal path in the unit disc, summed segmentwise."""
    pts = list(points)
    return float(sum(poincare_distance(a, b) for a, b in zip(pts[:-1], pts[1:])))


# ---------------------------------------------------------------------------
# Norm and length upper bounds
# ---------------------------------------------------------------------------

def royden_upper(J: StructureField, inside: Inside, p: np.ndarray, Y: np.ndarray,
                 budget: int = BUDGET, grid: Optional[DiscGrid] = None,
                 settings: Optional[SolverSettings] = None,
                 t_start: Optional[float] = None,
                 disc_ok: Optional[Callable[[GridMap], bool]] = None) -> NormBound:
    """1/t_max over jet discs u(0) = p, u_x(0) = t Y contained in ``inside``.

    Doubling from ``t_start`` while accepted (halving first if the start is
    rejected), then bisection with the remaining solve budget. ``disc_ok``
    adds a check on the whole disc, e.g. ``nonvanishing(k)``.
    """
    p, Y = np.asarray(p, dtype=float), np.asarray(Y, dtype=float)
    grid = grid or make_grid(KOBAYASHI_N)
    ny = float(np.linalg.norm(Y))
    if not inside(p[None, :])[0]:
        raise DomainError("base point is not inside the domain")
    if ny == 0.0:
        return NormBound(value=0.0, accepted_t=math.inf, witness=None, solves=0)

    solves = 0

    def attempt(t):
        nonlocal solves
        solves += 1
        try:
            u, report = solve_jet(J, Jet(1, p, (t * Y,)), grid, settings)
        except (DivergenceError, DomainError) as e:
            logger.debug(f"royden t={t:.4g}: rejected ({e})")
            return None
        if not report.converged or not np.all(inside(u.real)):
            return None
        if disc_ok is not None and not disc_ok(u):
            return None
        return u

    t = (t_start if t_start is not None else T_START) / ny
    best_t, best_u, rejected = 0.0, None, math.inf
    u = attempt(t)
    if u is not None:
        best_t, best_u = t, u
        while solves < budget:
            t *= 2.0
            u = attempt(t)
            if u is None:
                rejected = t
                break
            best_t, best_u = t, u
    else:
        rejected = t
        while solves < budget:
            t *= 0.5
            u = attempt(t)
            if u is not None:
                best_t, best_u = t, u
                break
            rejected = t

    while solves < budget and best_t > 0 and math.isfinite(rejected):
        mid = 0.5 * (best_t + rejected)
        u = attempt(mid)
        if u is not None:
            best_t, best_u = mid, u
        else:
            rejected = mid

    value = 1.0 / best_t if best_t > 0 else math.inf
    if best_t == 0:
        logger.warning(f"royden_upper: no disc accepted down to t = {rejected:.3g}")
    logger.debug(f"royden_upper: t_max={best_t:.6g}, bound={value:.6g}, solves={solves}")
    return NormBound(value=value, accepted_t=best_t, witness=best_u, solves=solves)


def path_length_upper(J: StructureField, inside: Inside, path: PathSample,
                      budget: int = BUDGET, grid: Optional[DiscGrid] = None,
                      settings: Optional[SolverSettings] = None) -> float:
    """sum over segments of royden_upper(midpoint, chord)."""
    total = 0.0
    for mid, chord in path.segments:
        total += royden_upper(J, inside, mid, chord, budget=budget, grid=grid, settings=settings).value
    return total


# ---------------------------------------------------------------------------
# Lower certificates
# ---------------------------------------------------------------------------

def distance_lower_certificate(gauge: DivergenceGauge, chi_far: float, chi_near: float,
                               method: str = "auto") -> DistanceCertificate:
    """(1/2) int_{chi_near}^{chi_far} ds / delta(s), closed form when available.

    Needs 0 < chi_near <= chi_far <= 1; equal levels give 0.
    """
    if not 0 < chi_near <= chi_far <= 1.0:
        raise HypothesisError(f"need 0 < chi_near <= chi_far <= 1, got chi_near={chi_near}, chi_far={chi_far}")
    if gauge.kind == "loglinear" and chi_far >= 1.0:
        raise HypothesisError("loglinear gauge needs chi_far < 1")
    if chi_near == chi_far:
        return DistanceCertificate(lower_bound=0.0, gauge=gauge, chi_near=chi_near,
                                   chi_far=chi_far, method="closed-form")
    if method == "auto" and gauge.kind == "linear":
        value = math.log(chi_far / chi_near) / (2 * gauge.C)
        used = "closed-form"
    elif method == "auto" and gauge.kind == "loglinear":
        value = (math.log(math.log(1 / chi_near)) - math.log(math.log(1 / chi_far))) / (2 * gauge.C)
        used = "closed-form"
    else:
        # in v = log s
        value, _ = integrate.quad(lambda v: math.exp(v) / gauge.delta(math.exp(v)),
                                  math.log(chi_near), math.log(chi_far), limit=200)
        value *= 0.5
        used = "quad"
    return DistanceCertificate(lower_bound=float(value), gauge=gauge, chi_near=chi_near,
                               chi_far=chi_far, method=used)


def divergence_profile(gauge: DivergenceGauge, chi_far: float,
                       near_list: Sequence[float]) -> List[Tuple[float, float]]:
    """(chi_near, lower bound) for each chi_near; near_list strictly decreasing, below chi_far."""
    near = [float(c) for c in near_list]
    if not near:
        raise HypothesisError("near_list is empty")
    if any(b >= a for a, b in zip(near, near[1:])):
        raise HypothesisError(f"near_list must be strictly decreasing, got {near}")
    if near[0] >= chi_far:
        raise HypothesisError(f"near_list entries must be below chi_far = {chi_far}, got {near[0]}")
    return [(c, distance_lower_certificate(gauge, chi_far, c).lower_bound) for c in near]
