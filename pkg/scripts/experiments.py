#!/usr/bin/env python3
"""
Experiments
===========
Scripted scenarios for J-holomorphic discs. Each ``run_*`` takes the resolved
config dict (config.yaml merged with an experiment config) and returns a
ResultTable; the CLI in jdisc.py only dispatches and writes reports.

Experiment settings live under ``experiments.<name>`` in the config; the grid
size falls back to ``grid.N``.
"""

import functools
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from numpy.polynomial import Polynomial
from tqdm import tqdm

try:
    from disc_common import (ConfigError, DivergenceError, DomainError, HypothesisError,
                             SolverSettings, get_path)
    from discgrid import (DiscGrid, GridMap, Jet, complex_gradient_at_zero, derivatives,
                          dzbar, gradient_at_zero, interp, make_grid, norm_c1phi, to_real,
                          value_at_zero, write_csv as write_disc_csv)
    from cauchy_green import CLOSED_FORMS, closed_form_errors, cz_integral, reproduction_error, tcg
    from disc_solver import (DEFAULT_N, continue_family, residual, solve_from_holomorphic, solve_jet,
                             solve_two_point)
    from geometry import (StructureField, VectorFieldExpr, dilate, load_structure, make_r6,
                          normalize_split)
    from kobayashi import (DivergenceGauge, distance_lower_certificate, divergence_profile,
                           nonvanishing, parse_inside, poincare_distance, polydisc_punctured,
                           royden_upper, sublevel)
    from psh_levi import (ScalarField, chirka_check, chirka_samples, ddc_levi, frobenius_defect,
                          is_complex_tangent, pullback_check)
    from reports import ResultTable, config_hash, stamp_runtime, trend_slope
    from utils.polyexpr import parse_zpoly
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent))
    from disc_common import (ConfigError, DivergenceError, DomainError, HypothesisError,
                             SolverSettings, get_path)
    from discgrid import (DiscGrid, GridMap, Jet, complex_gradient_at_zero, derivatives,
                          dzbar, gradient_at_zero, interp, make_grid, norm_c1phi, to_real,
                          value_at_zero, write_csv as write_disc_csv)
    from cauchy_green import CLOSED_FORMS, closed_form_errors, cz_integral, reproduction_error, tcg
    from disc_solver import (DEFAULT_N, continue_family, residual, solve_from_holomorphic, solve_jet,
                             solve_two_point)
    from geometry import (StructureField, VectorFieldExpr, dilate, load_structure, make_r6,
                          normalize_split)
    from kobayashi import (DivergenceGauge, distance_lower_certificate, divergence_profile,
                           nonvanishing, parse_inside, poincare_distance, polydisc_punctured,
                           royden_upper, sublevel)
    from psh_levi import (ScalarField, chirka_check, chirka_samples, ddc_levi, frobenius_defect,
                          is_complex_tangent, pullback_check)
    from reports import ResultTable, config_hash, stamp_runtime, trend_slope
    from utils.polyexpr import parse_zpoly

MIN_EXPERIMENT_N = 32
R6_MAX_DEGREE = 4
DEFAULT_NEAR_LIST = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]


# ---------------------------------------------------------------------------
# Plumbing
# ---------------------------------------------------------------------------

def _section(cfg: Dict[str, Any], name: str) -> Dict[str, Any]:
    return get_path(cfg, f"experiments.{name}", {}) or {}


def _grid(cfg: Dict[str, Any], name: str) -> DiscGrid:
    N = int(_section(cfg, name).get("N") or get_path(cfg, "grid.N", 64))
    if N < MIN_EXPERIMENT_N or N % 2:
        raise ConfigError(f"experiments.{name}.N must be even and >= {MIN_EXPERIMENT_N}, got {N}")
    return make_grid(N)


def _structure(cfg: Dict[str, Any], name: str, default: str) -> StructureField:
    sec = _section(cfg, name)
    J = load_structure(sec.get("structure") or default)
    if sec.get("dilation"):
        J = dilate(J, float(sec["dilation"]))
    return J


def _progress(cfg: Dict[str, Any]) -> bool:
    return bool(get_path(cfg, "experiments.progress", False))


def _verify_tol(cfg: Dict[str, Any]) -> float:
    return float(get_path(cfg, "experiments.verify_residual_tol", 5e-2))


def _new_table(name: str, columns: Sequence[str], cfg: Dict[str, Any], N: int,
               structure: Optional[str] = None, seed: Optional[int] = None) -> ResultTable:
    key = name.replace("-", "_")
    relevant = {
        "solver": get_path(cfg, "solver", {}),
        "grid": get_path(cfg, "grid", {}),
        "cauchy_green": get_path(cfg, "cauchy_green", {}),
        "experiment": _section(cfg, key),
    }
    meta = {"config_hash": config_hash(relevant), "N": N}
    if structure is not None:
        meta["structure"] = structure
    if seed is not None:
        meta["seed"] = seed
    return ResultTable(name=name, columns=list(columns), metadata=meta)


def _profile_table(table: ResultTable, gauge: DivergenceGauge, chi_far: float,
                   near_list: Sequence[float]) -> None:
    rows = divergence_profile(gauge, chi_far, sorted({float(c) for c in near_list}, reverse=True))
    table.add_table("divergence_profile", ["chi_near", "lower_bound"], rows)
    table.metadata["gauge"] = {"kind": gauge.kind, "C": gauge.C, "chi_far": chi_far}


def timed(fn: Callable[[Dict[str, Any]], ResultTable]) -> Callable[[Dict[str, Any]], ResultTable]:
    """Stamp the runtime block (excluded from report hashes) on the result."""
    @functools.wraps(fn)
    def wrapper(cfg: Dict[str, Any]) -> ResultTable:
        start = time.perf_counter()
        table = fn(cfg)
        stamp_runtime(table, time.perf_counter() - start)
        return table

    return wrapper


# ---------------------------------------------------------------------------
# Quadratic fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticFit:
    """f ~ c + Re(l z) + Re(alpha z^2) + beta |z|^2 near 0."""

    constant: float
    linear: complex
    alpha: complex
    beta: float
    residual: float


def fit_quadratic_form(grid: DiscGrid, values: np.ndarray, radius: float = 0.25) -> QuadraticFit:
    """Least squares on |z| <= radius against {1, x, y, Re z^2, Im z^2, |z|^2}."""
    mask = grid.inside(radius)
    z = grid.z[mask]
    f = np.asarray(values, dtype=float)[mask]
    x, y = z.real, z.imag
    A = np.stack([np.ones_like(x), x, y, x * x - y * y, 2 * x * y, x * x + y * y], axis=1)
    coef, *_ = np.linalg.lstsq(A, f, rcond=None)
    fit_res = float(np.abs(A @ coef - f).max())
    return QuadraticFit(constant=float(coef[0]), linear=complex(coef[1], -coef[2]),
                        alpha=complex(coef[3], -coef[4]), beta=float(coef[5]), residual=fit_res)


# ---------------------------------------------------------------------------
# R^6 example
# ---------------------------------------------------------------------------

def make_r6_disc(Z1, Z2, h1, grid: Optional[DiscGrid] = None) -> GridMap:
    """Disc (Z1, Z2, h1 + conj(h2)) with h2 = (1/2) int Z1 Z2' dz, h2(0) = 0."""
    grid = grid or make_grid(DEFAULT_N)
    polys = [parse_zpoly(p) for p in (Z1, Z2, h1)]
    for p in polys:
        if p.degree() > R6_MAX_DEGREE:
            raise HypothesisError(f"polynomial of degree {p.degree()} exceeds {R6_MAX_DEGREE}")
    P1, P2, H1 = polys
    H2 = 0.5 * (P1 * P2.deriv()).integ()
    z = grid.z
    values = np.stack([P1(z), P2(z), H1(z) + np.conj(H2(z))], axis=1)
    return GridMap(grid, values)


def _r6_family(count: int, seed: int, amplitude: float) -> List[Tuple[Polynomial, Polynomial, Polynomial]]:
    rng = np.random.default_rng(seed)
    z = Polynomial([0, 1])
    basis = [z, z ** 2, z + z ** 2]
    out = []
    while len(out) < count:
        for b1 in basis:
            for b2 in basis:
                a1, a2, b = amplitude * (rng.normal(size=3) + 1j * rng.normal(size=3)) * np.array([1, 1, 0.5])
                P1 = Polynomial(a1 * b1.coef.astype(complex))
                P2 = Polynomial(a2 * b2.coef.astype(complex))
                H2 = 0.5 * (P1 * P2.deriv()).integ()
                margin = rng.uniform(0.01, 0.5)
                c = margin + abs(b) + float(np.abs(H2.coef).sum())
                out.append((P1, P2, Polynomial([1j * c, b])))
    return out[:count]


@timed
def run_r6(cfg: Dict[str, Any]) -> ResultTable:
    """Harmonicity of Y3 and the gradient bound |grad Y3(0)| <= 2 Y3(0) over seeded discs."""
    sec = _section(cfg, "r6")
    grid = _grid(cfg, "r6")
    J = make_r6() if not sec.get("structure") else _structure(cfg, "r6", "r6")
    count = int(sec.get("count", 108))
    seed = int(sec.get("seed", 7))
    if count < 1:
        raise ConfigError("experiments.r6.count must be positive")
    table = _new_table("r6", ["disc", "y3_at_0", "residual", "laplacian_max", "gradient_ratio"],
                       cfg, grid.N, J.name, seed)
    tol = _verify_tol(cfg)
    family = _r6_family(count, seed, float(sec.get("amplitude", 0.5)))
    for k, (P1, P2, H1) in enumerate(tqdm(family, desc="r6 discs", disable=not _progress(cfg))):
        u = make_r6_disc(P1, P2, H1, grid)
        res = residual(J, u, radius=0.75)
        if res > tol:
            raise DivergenceError(f"r6 disc {k} fails the residual check ({res:.2e})")
        Y3 = u.with_values(u.values[:, 2].imag)
        if np.any(Y3.values.real <= 0):
            raise HypothesisError(f"r6 disc {k}: Y3 vanishes on the grid")
        _, _, lap, valid = derivatives(Y3)
        y0 = float(value_at_zero(Y3)[0].real)
        gx, gy = gradient_at_zero(Y3)
        table.add_row(k, y0, res, float(np.abs(lap.values[valid, 0]).max()),
                      math.hypot(gx[0].real, gy[0].real) / y0)

    gauge = DivergenceGauge("linear", float(sec.get("gauge_C", 2.0)))
    _profile_table(table, gauge, float(sec.get("chi_far", 1.0)), sec.get("near_list", DEFAULT_NEAR_LIST))
    table.metadata["summary"] = {
        "laplacian_max": float(table.column("laplacian_max").max()),
        "gradient_ratio_max": float(table.column("gradient_ratio").max()),
        "residual_max": float(table.column("residual").max()),
    }
    logger.info(f"r6: {count} discs, max ratio {table.metadata['summary']['gradient_ratio_max']:.4f}")
    return table


# ---------------------------------------------------------------------------
# Strictly pseudoconvex boundary
# ---------------------------------------------------------------------------

DIRECTIONS = {"normal": 0, "tangent": 2}


def _psconvex_rho(n: int) -> ScalarField:
    terms = " + ".join(f"x{k}**2 + y{k}**2" for k in range(1, n + 1))
    return ScalarField.from_expression(f"x1 + {terms}", n, label="Re z1 + |Z|^2")


def _status_for(exc: Exception) -> str:
    return "diverged" if isinstance(exc, DivergenceError) else "rejected"


@timed
def run_psconvex(cfg: Dict[str, Any]) -> ResultTable:
    """Boundary sweep in {Re z1 + |Z|^2 < 0}: both gradient ratios stay bounded."""
    sec = _section(cfg, "psconvex")
    grid = _grid(cfg, "psconvex")
    J = _structure(cfg, "psconvex", "standard:2")
    n = J.n
    rho = _psconvex_rho(n)
    inside = sublevel(rho)
    budget = int(sec.get("budget", get_path(cfg, "kobayashi.budget", 24)))
    radius = float(sec.get("ratio_radius", 0.25))
    settings = SolverSettings.from_config(cfg)
    tol = _verify_tol(cfg)
    exponents = [int(k) for k in sec.get("exponents", [1, 2, 3, 4, 5, 6])]
    directions = list(sec.get("directions", list(DIRECTIONS)))
    table = _new_table("psconvex", ["k", "boundary_distance", "direction", "t_max", "ratio_i",
                                    "ratio_ii", "residual", "status"], cfg, grid.N, J.name)
    center = np.zeros(2 * n)
    center[0] = -0.5
    mask = grid.inside(radius)

    jobs = [(k, d) for k in exponents for d in directions]
    for k, direction in tqdm(jobs, desc="psconvex", disable=not _progress(cfg)):
        if direction not in DIRECTIONS:
            raise ConfigError(f"unknown direction {direction!r}")
        dist = 10.0 ** (-k)
        p = np.zeros(2 * n)
        p[0] = -dist
        Y = np.zeros(2 * n)
        Y[DIRECTIONS[direction]] = 1.0
        try:
            bound = royden_upper(J, inside, p, Y, budget=budget, grid=grid, settings=settings, t_start=dist)
        except (DivergenceError, DomainError) as e:
            logger.warning(f"psconvex k={k} {direction}: {e}")
            table.add_row(k, dist, direction, None, None, None, None, _status_for(e))
            continue
        u = bound.witness
        if u is None:
            table.add_row(k, dist, direction, 0.0, None, None, None, "rejected")
            continue
        res = residual(J, u, radius=0.75)
        u0 = to_real(value_at_zero(u))
        depth = 0.5 - float(np.linalg.norm(u0 - center))
        spread = np.linalg.norm(u.real[mask] - u0, axis=1).max()
        gx, gy = gradient_at_zero(u)
        ratio_ii = math.hypot(gx[0].real, gy[0].real) / abs(u0[0])
        status = "ok" if res <= tol and depth > 0 else "unverified"
        table.add_row(k, dist, direction, bound.accepted_t, spread / math.sqrt(depth), ratio_ii, res, status)

    summary: Dict[str, float] = {}
    ok = table.ok_rows()
    ci = table.columns.index
    for direction in directions:
        rows = [r for r in ok if r[ci("direction")] == direction]
        if not rows:
            continue
        logd = [math.log(1 / r[ci("boundary_distance")]) for r in rows]
        for col in ("ratio_i", "ratio_ii"):
            vals = [r[ci(col)] for r in rows]
            summary[f"{col}_{direction}_max"] = float(max(vals))
            summary[f"{col}_{direction}_slope"] = trend_slope(logd, vals)
            summary[f"{col}_{direction}_growth"] = float(vals[-1] / vals[0]) if vals[0] > 0 else 0.0
    table.metadata["summary"] = summary

    gauge = DivergenceGauge("linear", float(sec.get("gauge_C", 1.0)))
    _profile_table(table, gauge, float(sec.get("chi_far", 0.5)), [10.0 ** (-k) for k in exponents])
    return table


# ---------------------------------------------------------------------------
# Punctured polydisc, hypersurface {z_n = 0}
# ---------------------------------------------------------------------------

@timed
def run_hypersurface(cfg: Dict[str, Any]) -> ResultTable:
    """Discs near {z_n = 0}: |dzbar u_n| <= C|u_n| and the log-Lipschitz bound at 0."""
    sec = _section(cfg, "hypersurface")
    grid = _grid(cfg, "hypersurface")
    J = normalize_split(_structure(cfg, "hypersurface", "standard:2"))
    n = J.n
    inside = polydisc_punctured(n, float(sec.get("polydisc_radius", 1.0)))
    budget = int(sec.get("budget", get_path(cfg, "kobayashi.budget", 24)))
    settings = SolverSettings.from_config(cfg)
    tol = _verify_tol(cfg)
    deltas = [float(d) for d in sec.get("deltas", [1e-1, 1e-2, 1e-3, 1e-4])]
    directions = {"normal": 2 * n - 2, "tangent": 0}
    table = _new_table("hypersurface", ["delta", "direction", "t_max", "dzbar_ratio",
                                        "schwarz_ratio", "residual", "status"], cfg, grid.N, J.name)
    mask = grid.interior & grid.inside(0.75)

    jobs = [(d, name) for d in deltas for name in directions]
    for delta, direction in tqdm(jobs, desc="hypersurface", disable=not _progress(cfg)):
        p = np.zeros(2 * n)
        p[2 * n - 2] = delta
        Y = np.zeros(2 * n)
        Y[directions[direction]] = 1.0
        try:
            bound = royden_upper(J, inside, p, Y, budget=budget, grid=grid, settings=settings,
                                 t_start=delta, disc_ok=nonvanishing(n - 1))
        except (DivergenceError, DomainError) as e:
            logger.warning(f"hypersurface delta={delta:g} {direction}: {e}")
            table.add_row(delta, direction, None, None, None, None, _status_for(e))
            continue
        u = bound.witness
        if u is None:
            table.add_row(delta, direction, 0.0, None, None, None, "rejected")
            continue
        res = residual(J, u, radius=0.75)
        un = u.values[:, n - 1]
        dzb = dzbar(u)[:, n - 1]
        dzbar_ratio = float((np.abs(dzb) / np.abs(un))[mask].max())
        dz0, dzb0 = complex_gradient_at_zero(u)
        u0 = abs(value_at_zero(u)[n - 1])
        schwarz = (abs(dz0[n - 1]) + abs(dzb0[n - 1])) / (u0 * math.log(1.0 / u0))
        status = "ok" if res <= tol else "unverified"
        table.add_row(delta, direction, bound.accepted_t, dzbar_ratio, schwarz, res, status)

    summary: Dict[str, float] = {}
    ok = table.ok_rows()
    ci = table.columns.index
    for direction in directions:
        rows = [r for r in ok if r[ci("direction")] == direction]
        if not rows:
            continue
        logd = [math.log(1 / r[ci("delta")]) for r in rows]
        for col in ("dzbar_ratio", "schwarz_ratio"):
            vals = [r[ci(col)] for r in rows]
            summary[f"{col}_{direction}_max"] = float(max(vals))
            summary[f"{col}_{direction}_slope"] = trend_slope(logd, vals)
    table.metadata["summary"] = summary

    gauge = DivergenceGauge("loglinear", float(sec.get("gauge_C", 1.0)))
    _profile_table(table, gauge, float(sec.get("chi_far", 1.0 / math.e)), deltas)
    return table


# ---------------------------------------------------------------------------
# Family of discs touching a totally real plane
# ---------------------------------------------------------------------------

def family_seeds(grid: DiscGrid, ts: Sequence[float], n: int) -> Tuple[List[GridMap], List[np.ndarray]]:
    """phi_t = (z, i(t + z^2)) for t >= 0 and (z, i((t/8) z + z^2)) for t < 0."""
    z = grid.z
    seeds, derivs = [], []
    for t in ts:
        values = np.zeros((grid.size, n), dtype=complex)
        deriv = np.zeros_like(values)
        values[:, 0], deriv[:, 0] = z, 1.0
        if t >= 0:
            values[:, 1], deriv[:, 1] = 1j * (t + z * z), 2j * z
        else:
            values[:, 1], deriv[:, 1] = 1j * ((t / 8) * z + z * z), 1j * (t / 8 + 2 * z)
        seeds.append(GridMap(grid, values))
        derivs.append(deriv)
    return seeds, derivs


def _dist_to_plane(points: np.ndarray) -> np.ndarray:
    """Distance to {y1 = y2 = 0}."""
    return np.hypot(points[:, 1], points[:, 3])


def _touch_parameter(ts: Sequence[float], m: Sequence[float], touch_tol: float) -> float:
    """Extrapolate m(t) to 0 from the first two rows above ``touch_tol``."""
    above = [(t, v) for t, v in zip(ts, m) if v > touch_tol]
    if not above:
        return float(ts[-1])
    if len(above) == 1 or above[0][0] == ts[0]:
        return float(above[0][0])
    (t0, m0), (t1, m1) = above[0], above[1]
    if m1 == m0:
        return float(t0)
    return float(t0 - m0 * (t1 - t0) / (m1 - m0))


@timed
def run_family_2b(cfg: Dict[str, Any]) -> ResultTable:
    """Continue phi_t to J-discs psi_t and locate where they stop meeting y1 = y2 = 0."""
    sec = _section(cfg, "family_2b")
    grid = _grid(cfg, "family_2b")
    J = _structure(cfg, "family_2b", "standard:2")
    if J.n < 2:
        raise ConfigError("family-2b needs n >= 2")
    delta = float(sec.get("delta", 0.1))
    count = int(sec.get("count", 9))
    eta = float(sec.get("eta", 0.05))
    touch_tol = float(sec.get("touch_tol", 1e-3))
    ring = float(sec.get("ring_radius", 0.75))
    ts = np.linspace(-delta, delta, count)
    seeds, derivs = family_seeds(grid, ts, J.n)
    discs = continue_family(J, seeds, eta, derivatives=derivs,
                            settings=SolverSettings.from_config(cfg), progress=_progress(cfg))

    table = _new_table("family-2b", ["t", "min_dist", "ring_min_dist", "deviation", "residual",
                                     "zeta0_re", "zeta0_im", "witness_bound"], cfg, grid.N, J.name)
    ring_mask = np.abs(np.abs(grid.z) - ring) <= grid.h
    tol = _verify_tol(cfg)
    m_values = []
    for t, phi, u in zip(ts, seeds, discs):
        res = residual(J, u, radius=0.75)
        if res > tol:
            raise DivergenceError(f"family member t={t:g} fails the residual check ({res:.2e})")
        node_dist = _dist_to_plane(u.real)
        center_dist = float(_dist_to_plane(to_real(value_at_zero(u))[None, :])[0])
        k = int(np.argmin(node_dist))
        if center_dist <= node_dist[k]:
            m, zeta0 = center_dist, 0j
        else:
            m, zeta0 = float(node_dist[k]), complex(grid.z[k])
        m_values.append(m)
        deviation = float(np.abs(u.values - phi.values).max())
        table.add_row(float(t), m, float(node_dist[ring_mask].min()), deviation, res,
                      zeta0.real, zeta0.imag, poincare_distance(ring, zeta0))

    delta0 = _touch_parameter(list(ts), m_values, touch_tol)
    table.metadata["summary"] = {
        "delta0": delta0,
        "ring_min_dist": float(table.column("ring_min_dist").min()),
        "max_deviation": float(table.column("deviation").max()),
        "disjoint_at_max": float(m_values[-1] > touch_tol),
        "witness_bound_max": float(table.column("witness_bound").max()),
    }
    logger.info(f"family-2b: delta0 = {delta0:.4g}")
    return table


# ---------------------------------------------------------------------------
# Second-order jet correction
# ---------------------------------------------------------------------------

def _jet2_fit(rho: ScalarField, u: GridMap, r: float,
              fit_radius: float, fit_tol: float) -> QuadraticFit:
    values = rho.eval_many(u.real)
    fit = fit_quadratic_form(u.grid, values, fit_radius)
    scale = max(float(np.abs(values[u.grid.inside(fit_radius)]).max()), r * r * fit_radius ** 2)
    if fit.residual > fit_tol * scale:
        raise HypothesisError(f"quadratic fit residual {fit.residual:.2e} too large")
    return fit


@timed
def run_jet2_family(cfg: Dict[str, Any]) -> ResultTable:
    """Prescribe the 2-jet that kills Re(a z^2) in rho o u and keep beta |z|^2 > 0."""
    sec = _section(cfg, "jet2")
    grid = _grid(cfg, "jet2")
    J = _structure(cfg, "jet2", "standard:2")
    n = J.n
    rho = ScalarField.from_expression(sec.get("rho", "x2 + x1**2 - y1**2 + x1**2 + y1**2"), n)
    Y = np.asarray(sec.get("Y", [1.0] + [0.0] * (2 * n - 1)), dtype=float)
    if Y.size != 2 * n:
        raise ConfigError(f"experiments.jet2.Y must have {2 * n} entries")
    radii = [float(r) for r in sec.get("radii", [0.5])]
    fit_radius = float(sec.get("fit_radius", 0.25))
    fit_tol = float(sec.get("fit_tol", 5e-2))
    settings = SolverSettings.from_config(cfg)
    origin = np.zeros(2 * n)
    if not is_complex_tangent(J, rho, origin, Y):
        raise HypothesisError("Y is not a complex tangent vector of {rho = 0} at 0")
    levi = ddc_levi(J, rho, origin, Y)
    if levi <= 0:
        raise HypothesisError(f"Levi form at Y is not positive ({levi:.3g})")
    grad = rho.gradient_many(origin[None, :])[0]
    normal = complex(grad[2], -grad[3])
    if abs(normal) == 0:
        raise HypothesisError("rho has no z2-derivative at 0")

    table = _new_table("jet2", ["r", "stage", "alpha_re", "alpha_im", "alpha_scaled", "beta_scaled",
                                "fit_residual", "residual"], cfg, grid.N, J.name)
    for r in radii:
        tangent, rep_t = solve_jet(J, Jet(1, origin, (r * Y,)), grid, settings)
        fit_t = _jet2_fit(rho, tangent, r, fit_radius, fit_tol)
        table.add_row(r, "tangent", fit_t.alpha.real, fit_t.alpha.imag, abs(fit_t.alpha) / r ** 2,
                      fit_t.beta / r ** 2, fit_t.residual, residual(J, tangent, radius=0.75))

        c = -fit_t.alpha / normal
        v2 = np.zeros(2 * n)
        v2[2], v2[3] = 2 * c.real, 2 * c.imag
        corrected, rep_c = solve_jet(J, Jet(2, origin, (r * Y, v2)), grid, settings)
        fit_c = _jet2_fit(rho, corrected, r, fit_radius, fit_tol)
        table.add_row(r, "corrected", fit_c.alpha.real, fit_c.alpha.imag, abs(fit_c.alpha) / r ** 2,
                      fit_c.beta / r ** 2, fit_c.residual, residual(J, corrected, radius=0.75))
        logger.debug(f"jet2 r={r:g}: alpha {fit_t.alpha:.4g} -> {fit_c.alpha:.4g}, "
                     f"newton {rep_t.newton_steps}+{rep_c.newton_steps}")

    ci = table.columns.index
    corrected_rows = [row for row in table.rows if row[ci("stage")] == "corrected"]
    table.metadata["summary"] = {
        "levi": levi,
        "alpha_scaled_max": float(max(row[ci("alpha_scaled")] for row in corrected_rows)),
        "beta_scaled_min": float(min(row[ci("beta_scaled")] for row in corrected_rows)),
    }
    return table


# ---------------------------------------------------------------------------
# Schwarz-type lemma for the punctured disc
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Schwarz2Report:
    holomorphy_defect: float
    ratio: float
    c1phi: float
    g0: complex
    gradient0: float


def schwarz2_check(g: GridMap, B: float, rtol: float = 5e-2) -> Schwarz2Report:
    """h = g exp(T(-g_zbar / g)) must be holomorphic; reports the log-Lipschitz ratio at 0."""
    vals = g.values[:, 0]
    grid = g.grid
    if np.any(vals == 0):
        raise HypothesisError("g vanishes on the grid")
    if np.abs(vals).max() > 0.5:
        raise HypothesisError(f"sup|g| = {np.abs(vals).max():.3g} exceeds 1/2")
    gzb = dzbar(g)[:, 0]
    interior = grid.interior
    # slack scales with max(B, 1) so B = 0 tolerates FD truncation
    excess = (np.abs(gzb) - (B + rtol * max(B, 1.0)) * np.abs(vals))[interior]
    if excess.size and excess.max() > 0:
        raise HypothesisError(f"|g_zbar| <= {B:g}|g| fails on the grid")

    w = tcg(g.with_values(-gzb / vals))
    h = g.with_values(vals * np.exp(w.values[:, 0]))
    mask = interior & grid.inside(0.75)
    defect = float(np.abs(dzbar(h)[:, 0])[mask].max() / np.abs(h.values).max())

    g0 = complex(value_at_zero(g)[0])
    dz0, dzb0 = complex_gradient_at_zero(g)
    grad0 = float(abs(dz0[0]) + abs(dzb0[0]))
    ratio = grad0 / (abs(g0) * math.log(1.0 / abs(g0)))
    return Schwarz2Report(holomorphy_defect=defect, ratio=ratio, c1phi=norm_c1phi(g), g0=g0, gradient0=grad0)


@timed
def schwarz2_sweep(cfg: Dict[str, Any]) -> ResultTable:
    """g = c exp(a z + b conj z) over c, plus the holomorphic family b = 0."""
    sec = _section(cfg, "schwarz2")
    grid = _grid(cfg, "schwarz2")
    a = complex(sec.get("a", 0.5))
    b = complex(sec.get("b", 0.5))
    cs = [float(c) for c in sec.get("cs", [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])]
    rtol = float(sec.get("hypothesis_rtol", 5e-2))
    table = _new_table("schwarz2", ["c", "family", "holomorphy_defect", "ratio", "exact_ratio", "c1phi"],
                       cfg, grid.N)
    z = grid.z
    for family, bb in (("general", b), ("holomorphic", 0j)):
        for c in cs:
            g = GridMap(grid, c * np.exp(a * z + bb * np.conj(z)))
            rep = schwarz2_check(g, abs(bb), rtol)
            exact = (abs(a) + abs(bb)) / math.log(1.0 / c)
            table.add_row(c, family, rep.holomorphy_defect, rep.ratio, exact, rep.c1phi)

    ci = table.columns.index
    summary = {}
    for family in ("general", "holomorphic"):
        rows = [r for r in table.rows if r[ci("family")] == family]
        ratios = [r[ci("ratio")] for r in rows]
        summary[f"ratio_{family}_max"] = float(max(ratios))
        summary[f"ratio_{family}_slope"] = trend_slope([math.log(1 / r[ci("c")]) for r in rows], ratios)
        summary[f"defect_{family}_max"] = float(max(r[ci("holomorphy_defect")] for r in rows))
    table.metadata["summary"] = summary
    return table


# ---------------------------------------------------------------------------
# Singular integrals
# ---------------------------------------------------------------------------

@timed
def cz_sweep(cfg: Dict[str, Any]) -> ResultTable:
    """PV int f/(z^2 g) for g = delta + |z|^2/4, f = z^2/4 against pi log(1 + 1/(4 delta))."""
    sec = _section(cfg, "cz")
    grid = _grid(cfg, "cz")
    deltas = [float(d) for d in sec.get("deltas", DEFAULT_NEAR_LIST)]
    block = int(sec.get("model_block", get_path(cfg, "cauchy_green.model_block", 4)))
    table = _new_table("cz", ["delta", "value_re", "value_im", "exact", "relative_error",
                              "growth_ratio", "inner", "outer"], cfg, grid.N)
    z = grid.z
    f = GridMap(grid, z * z / 4)
    for d in deltas:
        g = GridMap(grid, d + np.abs(z) ** 2 / 4)
        res = cz_integral(f, g, block)
        exact = math.pi * math.log(1 + 1 / (4 * d))
        table.add_row(d, res.value.real, res.value.imag, exact, abs(res.value - exact) / exact,
                      abs(res.value) / math.log(1 / d), abs(res.inner), abs(res.outer))

    g_sym = GridMap(grid, 0.25 + 0.1 * z)
    symmetric = cz_integral(g_sym, g_sym, block)
    growth = table.column("growth_ratio")
    table.metadata["summary"] = {
        "growth_spread": float(growth.max() / growth.min()),
        "relative_error_max": float(table.column("relative_error").max()),
        "symmetric_value": abs(symmetric.value),
    }
    return table


@timed
def tcg_test(cfg: Dict[str, Any]) -> ResultTable:
    """Reproduction dzbar(T g) = g on {1, zeta, conj(zeta)^2, |zeta|^2} and the closed forms."""
    sec = _section(cfg, "tcg_test")
    grid = _grid(cfg, "tcg_test")
    radius = float(sec.get("radius", get_path(cfg, "cauchy_green.check_radius", 0.75)))
    tol = float(sec.get("tol", 5e-2))
    family = {
        "1": lambda z: np.ones_like(z),
        "zeta": lambda z: z,
        "conj(zeta)^2": lambda z: np.conj(z) ** 2,
        "|zeta|^2": lambda z: np.abs(z) ** 2,
    }
    table = _new_table("tcg-test", ["case", "check", "error"], cfg, grid.N)
    for name, fn in family.items():
        table.add_row(name, "reproduction", reproduction_error(fn, grid.N, radius))
    for name, err in closed_form_errors(grid.N, radius).items():
        table.add_row(name, CLOSED_FORMS[name][0], err)
    worst = float(table.column("error").max())
    table.metadata["summary"] = {"max_error": worst, "tol": tol, "passed": float(worst <= tol)}
    return table


# ---------------------------------------------------------------------------
# Single operations (CLI subcommands)
# ---------------------------------------------------------------------------

def _vector(values, dim: int, what: str) -> np.ndarray:
    if isinstance(values, str):
        values = [v for v in values.replace(";", ",").split(",") if v.strip()]
    try:
        vec = np.asarray([float(v) for v in values], dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{what}: not a list of numbers") from e
    if vec.size != dim:
        raise ConfigError(f"{what}: expected {dim} entries, got {vec.size}")
    return vec


def seed_from_polys(grid: DiscGrid, polys: Sequence) -> Tuple[GridMap, np.ndarray]:
    """Holomorphic seed with one z-polynomial per complex component, and h'."""
    try:
        parsed = [parse_zpoly(p) for p in polys]
    except ValueError as e:
        raise ConfigError(str(e)) from e
    z = grid.z
    h = GridMap(grid, np.stack([np.broadcast_to(P(z), z.shape) for P in parsed], axis=1))
    dh = np.stack([np.broadcast_to(P.deriv()(z), z.shape) for P in parsed], axis=1)
    return h, dh


def _solved_disc(cfg: Dict[str, Any], key: str, default_structure: str,
                 default_seed: Sequence[str]) -> Tuple[StructureField, GridMap, Any]:
    sec = _section(cfg, key)
    grid = _grid(cfg, key)
    J = _structure(cfg, key, default_structure)
    polys = sec.get("seed") or default_seed
    if isinstance(polys, str):
        polys = [p for p in polys.split(",") if p.strip()]
    if len(polys) != J.n:
        raise ConfigError(f"experiments.{key}.seed needs {J.n} polynomials, got {len(polys)}")
    h, dh = seed_from_polys(grid, polys)
    u, report = solve_from_holomorphic(J, h, dh=dh, settings=SolverSettings.from_config(cfg))
    if sec.get("disc_csv"):
        write_disc_csv(u, Path(sec["disc_csv"]))
        logger.info(f"disc written to {sec['disc_csv']}")
    return J, u, report


@timed
def run_solve_disc(cfg: Dict[str, Any]) -> ResultTable:
    """One J-disc from a holomorphic seed."""
    J, u, report = _solved_disc(cfg, "solve_disc", "standard:2", ["z", "z**2/2"])
    table = _new_table("solve-disc", ["iterations", "residual", "fd_residual", "contraction", "converged"],
                       cfg, u.grid.N, J.name)
    table.add_row(report.iterations, report.residual, residual(J, u, radius=0.75),
                  report.contraction_estimate, float(report.converged))
    return table


@timed
def run_jet(cfg: Dict[str, Any]) -> ResultTable:
    """Disc with a prescribed 1- or 2-jet at 0."""
    sec = _section(cfg, "jet")
    grid = _grid(cfg, "jet")
    J = _structure(cfg, "jet", "standard:2")
    dim = J.dim
    p = _vector(sec.get("point", [0.0] * dim), dim, "point")
    vs = sec.get("v") or [[0.5] + [0.0] * (dim - 1)]
    if isinstance(vs[0], (int, float)):
        vs = [vs]
    target = Jet(len(vs), p, tuple(_vector(v, dim, "v") for v in vs))
    u, report = solve_jet(J, target, grid, SolverSettings.from_config(cfg))
    table = _new_table("jet", ["k", "jet_error", "value_error", "residual", "fd_residual",
                               "newton_steps", "iterations"], cfg, grid.N, J.name)
    table.add_row(target.k, report.jet_error, float(np.abs(to_real(value_at_zero(u)) - p).max()),
                  report.residual, residual(J, u, radius=0.75), report.newton_steps, report.iterations)
    return table


@timed
def run_two_point(cfg: Dict[str, Any]) -> ResultTable:
    """Disc through p at 0 and q at 1/2."""
    sec = _section(cfg, "two_point")
    grid = _grid(cfg, "two_point")
    J = _structure(cfg, "two_point", "standard:2")
    dim = J.dim
    p = _vector(sec.get("p", [0.0] * dim), dim, "p")
    q = _vector(sec.get("q", [0.2] + [0.0] * (dim - 1)), dim, "q")
    u, report = solve_two_point(J, p, q, grid, SolverSettings.from_config(cfg))
    table = _new_table("two-point", ["p_error", "q_error", "residual", "fd_residual", "newton_steps"],
                       cfg, grid.N, J.name)
    table.add_row(float(np.abs(to_real(value_at_zero(u)) - p).max()),
                  float(np.abs(to_real(interp(u, 0.5)) - q).max()),
                  report.residual, residual(J, u, radius=0.75), report.newton_steps)
    return table


@timed
def run_family(cfg: Dict[str, Any]) -> ResultTable:
    """Continuation along seeds given as templates in {t}, e.g. ["z", "I*({t} + z**2)"]."""
    sec = _section(cfg, "family")
    grid = _grid(cfg, "family")
    J = _structure(cfg, "family", "standard:2")
    template = sec.get("seed") or ["z", "I*({t} + z**2)"]
    ts = [float(t) for t in sec.get("ts", [0.0, 0.05, 0.1])]
    eta = float(sec.get("eta", 0.05))
    seeds, derivs = [], []
    for t in ts:
        h, dh = seed_from_polys(grid, [str(p).format(t=repr(t)) for p in template])
        seeds.append(h)
        derivs.append(dh)
    discs = continue_family(J, seeds, eta, derivatives=derivs, settings=SolverSettings.from_config(cfg),
                            progress=_progress(cfg))
    table = _new_table("family", ["t", "deviation", "fd_residual"], cfg, grid.N, J.name)
    for t, h, u in zip(ts, seeds, discs):
        table.add_row(t, float(np.abs(u.values - h.values).max()), residual(J, u, radius=0.75))
    return table


@timed
def run_psh_check(cfg: Dict[str, Any]) -> ResultTable:
    """Laplacian(lambda o u) against dd^c lambda(u_x, J u_x) along a solved disc."""
    sec = _section(cfg, "psh_check")
    J, u, report = _solved_disc(cfg, "psh_check", "chirka-perturbed(0.05)", ["0.5*z", "0.25*z**2"])
    lam = ScalarField.from_expression(sec.get("lambda", "x1**2 + y1**2 + x2**2 + y2**2"), J.n)
    check = pullback_check(J, lam, u, radius=float(sec.get("radius", 0.75)),
                           residual_tol=float(get_path(cfg, "psh.pullback_residual_tol", 1e-2)))
    table = _new_table("psh-check", ["maxdiff", "lhs_max", "rhs_max", "nodes", "disc_residual"],
                       cfg, u.grid.N, J.name)
    table.add_row(check.maxdiff, check.lhs_max, check.rhs_max, check.nodes, report.residual)
    return table


@timed
def run_chirka(cfg: Dict[str, Any]) -> ResultTable:
    """min dd^c(log|Z| + A|Z|)(Y, JY)|Z|/|Y|^2 over seeded samples."""
    sec = _section(cfg, "chirka")
    J = _structure(cfg, "chirka", "r6")
    A = float(sec.get("A", 10.0))
    count = int(sec.get("count", 500))
    seed = int(sec.get("seed", 0))
    samples = chirka_samples(J.n, count, float(sec.get("r_min", 0.01)), float(sec.get("r_max", 0.5)), seed)
    value = chirka_check(J, A, samples)
    table = _new_table("chirka", ["A", "count", "min_value"], cfg, int(get_path(cfg, "grid.N", 64)), J.name, seed)
    table.add_row(A, count, value)
    table.metadata["summary"] = {"min_value": value, "nonnegative": float(value >= 0)}
    return table


@timed
def run_frobenius(cfg: Dict[str, Any]) -> ResultTable:
    """dd^c rho(Y, T) and its bracket term for complex tangent fields."""
    sec = _section(cfg, "frobenius")
    J = _structure(cfg, "frobenius", "r6")
    n = J.n
    rho = ScalarField.from_expression(sec.get("rho", f"y{n}"), n)
    p = _vector(sec.get("point", [0.0] * J.dim), J.dim, "point")
    default_Y = ["1"] + ["0"] * (2 * n - 1)
    default_T = ["0", "0", "1", "0", "x1", "0"] if n == 3 else ["0", "0", "1"] + ["0"] * (2 * n - 3)
    try:
        Y = VectorFieldExpr.from_strings(sec.get("Y") or default_Y, n)
        T = VectorFieldExpr.from_strings(sec.get("T") or default_T, n)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    res = frobenius_defect(J, rho, p, Y, T)
    table = _new_table("frobenius", ["ddc", "bracket_pairing", "difference"],
                       cfg, int(get_path(cfg, "grid.N", 64)), J.name)
    table.add_row(res.ddc, res.bracket_pairing, abs(res.ddc - res.bracket_pairing))
    return table


@timed
def run_kobayashi(cfg: Dict[str, Any]) -> ResultTable:
    """Royden norm upper bound in a domain given by an 'inside' spec."""
    sec = _section(cfg, "kobayashi")
    N = int(sec.get("N") or get_path(cfg, "kobayashi.grid_N", 32))
    grid = make_grid(N)
    J = _structure(cfg, "kobayashi", "standard:1")
    inside = parse_inside(sec.get("inside", "ball:1"), J.n)
    p = _vector(sec.get("point", [0.0] * J.dim), J.dim, "point")
    Y = _vector(sec.get("vector", [1.0] + [0.0] * (J.dim - 1)), J.dim, "vector")
    budget = int(sec.get("budget", get_path(cfg, "kobayashi.budget", 24)))
    bound = royden_upper(J, inside, p, Y, budget=budget, grid=grid, settings=SolverSettings.from_config(cfg),
                         t_start=sec.get("t_start"))
    table = _new_table("kobayashi", ["value", "accepted_t", "solves"], cfg, N, J.name)
    table.add_row(bound.value, bound.accepted_t, bound.solves)
    return table


@timed
def run_divergence(cfg: Dict[str, Any]) -> ResultTable:
    """Lower distance certificates for one gauge over a list of chi_near."""
    sec = _section(cfg, "divergence")
    gauge = DivergenceGauge(str(sec.get("kind", "linear")), float(sec.get("C", 1.0)))
    chi_far = float(sec.get("chi_far", 1.0 if gauge.kind == "linear" else 1.0 / math.e))
    near = sorted((float(c) for c in sec.get("near_list", DEFAULT_NEAR_LIST)), reverse=True)
    method = str(sec.get("method", "auto"))
    table = _new_table("divergence", ["chi_near", "lower_bound", "quad_check"],
                       cfg, int(get_path(cfg, "grid.N", 64)))
    for c in near:
        cert = distance_lower_certificate(gauge, chi_far, c, method)
        check = distance_lower_certificate(gauge, chi_far, c, "quad")
        table.add_row(c, cert.lower_bound, check.lower_bound)
    table.metadata["gauge"] = {"kind": gauge.kind, "C": gauge.C, "chi_far": chi_far}
    return table


EXPERIMENTS: Dict[str, Callable[[Dict[str, Any]], ResultTable]] = {
    "r6": run_r6,
    "psconvex": run_psconvex,
    "hypersurface": run_hypersurface,
    "family-2b": run_family_2b,
    "jet2": run_jet2_family,
    "schwarz2": schwarz2_sweep,
    "cz": cz_sweep,
    "tcg-test": tcg_test,
    "solve-disc": run_solve_disc,
    "jet": run_jet,
    "two-point": run_two_point,
    "family": run_family,
    "psh-check": run_psh_check,
    "chirka": run_chirka,
    "frobenius": run_frobenius,
    "kobayashi": run_kobayashi,
    "divergence": run_divergence,
}
