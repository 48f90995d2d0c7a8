#!/usr/bin/env python3
"""
Disc Solver
===========
J-holomorphic discs u: D -> R^{2n}, i.e. solutions of

    d/dzbar u + Q_J(u) d/dz u = 0,

built by Picard iteration on the density g = d/dzbar u with

    u = h + T_CG g,   d/dz u = h' + S g,   g <- -Q_J(u) (h' + S g)

where h is the holomorphic seed and S the Beurling transform. The fixed point
satisfies u + T_CG(Q_J(u) d/dz u) = h.

Jet and two-point discs are solved by damped Newton on the seed parameters in
rescaled coordinates J~(w) = J(p + s w).
"""

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from tqdm import tqdm

try:
    from disc_common import (CONFIG, DivergenceError, DomainError, HypothesisError,
                             SolverSettings, get_path)
    from discgrid import (DiscGrid, GridMap, Jet, complex_gradient_at_zero, dzbar,
                          grad_norm, interp, jet_at_zero, make_grid, partials,
                          to_complex, to_real, value_at_zero)
    from cauchy_green import beurling, tcg
    from geometry import StructureField, affine_pullback, q_matrix_many
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent))
    from disc_common import (CONFIG, DivergenceError, DomainError, HypothesisError,
                             SolverSettings, get_path)
    from discgrid import (DiscGrid, GridMap, Jet, complex_gradient_at_zero, dzbar,
                          grad_norm, interp, jet_at_zero, make_grid, partials,
                          to_complex, to_real, value_at_zero)
    from cauchy_green import beurling, tcg
    from geometry import StructureField, affine_pullback, q_matrix_many

DEFAULT_N = int(get_path(CONFIG, "grid.N", 64))
DEFAULT_SETTINGS = SolverSettings.from_config(CONFIG)


@dataclass
class SolveReport:
    """Outcome of one solve. ``density`` (d/dzbar u) is kept for warm starts."""

    iterations: int
    residual: float
    converged: bool
    contraction_estimate: float
    jet_error: float = 0.0
    newton_steps: int = 0
    density: Optional[np.ndarray] = field(default=None, repr=False)


def _node_sup(values: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    norms = np.sqrt(np.sum(np.abs(values.reshape(values.shape[0], -1)) ** 2, axis=1))
    if mask is not None:
        norms = norms[mask]
    return float(norms.max()) if norms.size else 0.0


def _apply_q(Q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Q acting on the real representation of complex vectors w (M, n)."""
    return to_complex(np.einsum("mij,mj->mi", Q, to_real(w)))


class _ChangeMonitor:
    """Sup-norm updates of a fixed-point loop, checked against the divergence rules."""

    def __init__(self, settings: SolverSettings, label: str):
        self.settings = settings
        self.label = label
        self.changes: List[float] = []
        self.streak = 0
        self.contraction = 0.0

    def record(self, change: float) -> None:
        if not math.isfinite(change):
            raise DivergenceError(f"{self.label} produced non-finite values")
        if self.changes and self.changes[-1] > 0:
            self.contraction = change / self.changes[-1]
            self.streak = self.streak + 1 if self.contraction >= 1.0 else 0
            if self.streak >= self.settings.divergence_window:
                raise DivergenceError(
                    f"{self.label} diverges (contraction >= 1 for {self.streak} steps, change {change:.3e})")
        self.changes.append(change)

    def check_stall(self, threshold: float) -> None:
        """Raise when the budget ran out without the last update shrinking below stall_ratio of the first."""
        first, last = self.changes[0], self.changes[-1]
        if first > threshold and last >= self.settings.stall_ratio * first:
            raise DivergenceError(
                f"{self.label} made no progress in {len(self.changes)} steps ({first:.3e} -> {last:.3e})")


def _picard(J: StructureField, h: GridMap, dh: np.ndarray, settings: SolverSettings,
            warm: Optional[np.ndarray] = None) -> Tuple[GridMap, SolveReport]:
    grid = h.grid
    g = np.zeros_like(h.values) if warm is None else np.array(warm, dtype=complex)
    scale = _node_sup(dh) or 1.0
    threshold = settings.tol * scale
    monitor = _ChangeMonitor(settings, "Picard iteration")
    converged = False
    iterations = 0

    for iterations in range(1, settings.max_iterations + 1):
        u = h.values + tcg(h.with_values(g)).values if np.any(g) else h.values
        J.require_inside(to_real(u), "disc")
        dzu = dh + (beurling(h.with_values(g)).values if np.any(g) else 0.0)
        rho = -_apply_q(q_matrix_many(J, to_real(u)), dzu)
        change = _node_sup(rho - g)
        monitor.record(change)
        g = rho
        logger.debug(f"picard {iterations}: change={change:.3e} contraction={monitor.contraction:.3f}")
        if change <= threshold:
            converged = True
            break

    if not converged:
        monitor.check_stall(threshold)

    Tg = h.with_values(g)
    u = h.values + tcg(Tg).values
    J.require_inside(to_real(u), "disc")
    defect = g + _apply_q(q_matrix_many(J, to_real(u)), dh + beurling(Tg).values)
    residual = _node_sup(defect, grid.interior)
    converged = converged and residual <= settings.residual_tol * scale
    report = SolveReport(iterations=iterations, residual=residual, converged=converged,
                         contraction_estimate=monitor.contraction, density=g)
    return h.with_values(u), report


def _as_array(dh, grid: DiscGrid) -> np.ndarray:
    values = dh.values if isinstance(dh, GridMap) else np.asarray(dh, dtype=complex)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != grid.size:
        raise ValueError("derivative does not match the grid")
    return values


def solve_from_holomorphic(J: StructureField, h: GridMap, dh=None,
                           settings: Optional[SolverSettings] = None,
                           warm: Optional[np.ndarray] = None) -> Tuple[GridMap, SolveReport]:
    """J-holomorphic disc u with u + T_CG(Q_J(u) u_z) = h.

    ``dh`` is the exact derivative of the seed when known; otherwise it is
    taken by finite differences after checking that h is holomorphic.
    """
    settings = settings or DEFAULT_SETTINGS
    if h.n != J.n:
        raise HypothesisError(f"seed has {h.n} components, structure has {J.n}")
    if dh is None:
        fx, fy = partials(h)
        dh_vals = 0.5 * (fx - 1j * fy)
        defect = _node_sup(dzbar(h), h.grid.interior)
        if defect > settings.holomorphic_tol * max(1.0, _node_sup(dh_vals)):
            raise HypothesisError(f"seed is not holomorphic on the grid (|dzbar h| = {defect:.3e})")
    else:
        dh_vals = _as_array(dh, h.grid)
    u, report = _picard(J, h, dh_vals, settings, warm)
    logger.debug(f"solve_from_holomorphic: {report.iterations} iterations, residual {report.residual:.2e}")
    return u, report


def residual(J: StructureField, u: GridMap, radius: Optional[float] = None) -> float:
    """FD residual sup |u_zbar + Q_J(u) u_z| over interior nodes (|z| <= radius)."""
    fx, fy = partials(u)
    dz, dzb = 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)
    defect = dzb + _apply_q(q_matrix_many(J, u.real), dz)
    mask = u.grid.interior.copy()
    if radius is not None:
        mask &= u.grid.inside(radius)
    return _node_sup(defect, mask)


def gradient_bound_ratio(u: GridMap, radius: float = 0.5) -> float:
    """sup_{|z| <= radius} |grad u| / sup |u|."""
    fx, fy = partials(u)
    mask = u.grid.inside(radius)
    return float(grad_norm(fx, fy)[mask].max() / max(u.sup(), 1e-300))


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------

def seed_from_jet(grid: DiscGrid, q: np.ndarray, ws: Sequence[np.ndarray]) -> Tuple[GridMap, np.ndarray]:
    """h(z) = q + sum_l z^l w_l / l! (complex C^n data) and h'(z)."""
    z = grid.z[:, None]
    values = np.broadcast_to(np.asarray(q, dtype=complex), (grid.size, len(q))).copy()
    deriv = np.zeros_like(values)
    for l, w in enumerate(ws, start=1):
        w = np.asarray(w, dtype=complex)
        values = values + z ** l * w / math.factorial(l)
        deriv = deriv + z ** (l - 1) * w / math.factorial(l - 1)
    return GridMap(grid, values), deriv


def seed_two_point(grid: DiscGrid, a: np.ndarray, b: np.ndarray) -> Tuple[GridMap, np.ndarray]:
    """h(z) = a + 2 z (b - a), so h(0) = a and h(1/2) = b."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    values = a + 2.0 * grid.z[:, None] * (b - a)
    return GridMap(grid, values), np.broadcast_to(2.0 * (b - a), values.shape).copy()


def _constant_disc(grid: DiscGrid, p_real: np.ndarray) -> Tuple[GridMap, SolveReport]:
    values = np.broadcast_to(to_complex(p_real), (grid.size, p_real.size // 2)).copy()
    return GridMap(grid, values), SolveReport(iterations=0, residual=0.0, converged=True,
                                              contraction_estimate=0.0)


# ---------------------------------------------------------------------------
# Newton on seed parameters
# ---------------------------------------------------------------------------

class _SeedProblem:
    """F(x) = functionals(solve(seed(x))) - target, with warm-started inner solves."""

    def __init__(self, J: StructureField, grid: DiscGrid, seed: Callable, functionals: Callable,
                 target: np.ndarray, settings: SolverSettings):
        self.J, self.grid, self.seed = J, grid, seed
        self.functionals, self.target, self.settings = functionals, target, settings
        self.density = None
        self.inner_iterations = 0

    def __call__(self, x: np.ndarray, keep: bool = False):
        h, dh = self.seed(x)
        u, report = _picard(self.J, h, dh, self.settings, self.density)
        self.inner_iterations += report.iterations
        if not report.converged:
            raise DivergenceError(f"inner solve did not converge (residual {report.residual:.2e})")
        if keep:
            self.density = report.density
        return self.functionals(u) - self.target, u, report


def _fd_jacobian(problem: _SeedProblem, x: np.ndarray, r: np.ndarray, step: float) -> np.ndarray:
    jac = np.empty((r.size, x.size))
    for i in range(x.size):
        xi = x.copy()
        xi[i] += step
        jac[:, i] = (problem(xi)[0] - r) / step
    return jac


def _newton(problem: _SeedProblem, x0: np.ndarray, settings: SolverSettings, label: str):
    x = x0.copy()
    r, u, report = problem(x, keep=True)
    nr = float(np.abs(r).max())
    jac, fresh, steps = None, False, 0
    while nr > settings.jet_tol:
        if steps >= settings.max_outer:
            raise DivergenceError(f"{label}: Newton stagnated at jet error {nr:.3e}")
        if jac is None:
            jac, fresh = _fd_jacobian(problem, x, r, settings.newton_step), True
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(jac, -r, rcond=None)[0]
        lam, accepted = 1.0, None
        while lam >= settings.damping_min:
            try:
                trial = problem(x + lam * dx)
            except (DivergenceError, DomainError):
                trial = None
            if trial is not None and np.abs(trial[0]).max() < (1 - 1e-4 * lam) * nr:
                accepted = trial
                break
            lam *= 0.5
        if accepted is None:
            if fresh:
                raise DivergenceError(f"{label}: no damped Newton step reduces the jet error {nr:.3e}")
            jac = None
            continue
        x = x + lam * dx
        problem.density = accepted[2].density
        new_nr = float(np.abs(accepted[0]).max())
        if new_nr > 0.5 * nr:
            jac = None
        fresh = False
        r, u, report = accepted
        nr = new_nr
        steps += 1
        logger.debug(f"{label}: newton {steps} jet error {nr:.3e} (damping {lam:g})")
    return u, report, nr, steps


def _finish(p_real: np.ndarray, scale: float, u: GridMap, report: SolveReport,
            jet_error: float, steps: int, inner: int) -> Tuple[GridMap, SolveReport]:
    values = to_complex(p_real) + scale * u.values
    out = SolveReport(iterations=inner, residual=scale * report.residual, converged=report.converged,
                      contraction_estimate=report.contraction_estimate, jet_error=scale * jet_error,
                      newton_steps=steps, density=report.density)
    return u.with_values(values), out


def solve_jet(J: StructureField, target: Jet, grid: Optional[DiscGrid] = None,
              settings: Optional[SolverSettings] = None) -> Tuple[GridMap, SolveReport]:
    """Disc with prescribed k-jet at 0 (jet_at_zero(u, k) = target)."""
    settings = settings or DEFAULT_SETTINGS
    grid = grid or make_grid(DEFAULT_N)
    n = J.n
    if target.p.size != 2 * n:
        raise HypothesisError(f"jet has dimension {target.p.size}, structure {2 * n}")
    J.require_inside(target.p[None, :], "jet base point")
    scale = max((float(np.linalg.norm(v)) for v in target.v), default=0.0)
    if scale == 0.0:
        return _constant_disc(grid, target.p)

    Jt = affine_pullback(J, target.p, scale)
    k = target.k
    goal = np.concatenate([np.zeros(2 * n)] + [v / scale for v in target.v])

    def seed(x):
        parts = [to_complex(x[2 * n * l: 2 * n * (l + 1)]) for l in range(k + 1)]
        return seed_from_jet(grid, parts[0], parts[1:])

    def functionals(u):
        return jet_at_zero(u, k).vector()

    problem = _SeedProblem(Jt, grid, seed, functionals, goal, settings)
    u, report, err, steps = _newton(problem, goal.copy(), settings, "solve_jet")
    return _finish(target.p, scale, u, report, err, steps, problem.inner_iterations)


def solve_two_point(J: StructureField, p: np.ndarray, q: np.ndarray, grid: Optional[DiscGrid] = None,
                    settings: Optional[SolverSettings] = None) -> Tuple[GridMap, SolveReport]:
    """Disc with u(0) = p and u(1/2) = q."""
    settings = settings or DEFAULT_SETTINGS
    grid = grid or make_grid(DEFAULT_N)
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    J.require_inside(np.stack([p, q]), "two-point data")
    scale = float(np.linalg.norm(q - p))
    if scale == 0.0:
        return _constant_disc(grid, p)

    n = J.n
    Jt = affine_pullback(J, p, scale)
    d = (q - p) / scale
    goal = np.concatenate([np.zeros(2 * n), d])

    def seed(x):
        return seed_two_point(grid, to_complex(x[:2 * n]), to_complex(x[2 * n:]))

    def functionals(u):
        return np.concatenate([to_real(value_at_zero(u)), to_real(interp(u, 0.5))])

    problem = _SeedProblem(Jt, grid, seed, functionals, goal, settings)
    u, report, err, steps = _newton(problem, goal.copy(), settings, "solve_two_point")
    return _finish(p, scale, u, report, err, steps, problem.inner_iterations)


def continue_family(J: StructureField, phis: Sequence[GridMap], eta: float,
                    derivatives: Optional[Sequence] = None,
                    settings: Optional[SolverSettings] = None,
                    progress: bool = False) -> List[GridMap]:
    """Solve along a family of seeds, warm-starting each member from the previous one.

    Raises DivergenceError if a member fails or moves more than ``eta`` from its seed.
    """
    settings = settings or DEFAULT_SETTINGS
    warm = None
    out = []
    for idx, phi in enumerate(tqdm(phis, desc="family", disable=not progress)):
        dh = derivatives[idx] if derivatives is not None else None
        u, report = solve_from_holomorphic(J, phi, dh=dh, settings=settings, warm=warm)
        if not report.converged:
            raise DivergenceError(f"family member {idx} did not converge (residual {report.residual:.2e})")
        deviation = _node_sup(u.values - phi.values)
        if deviation > eta:
            raise DivergenceError(f"family member {idx} moved {deviation:.3e} > eta = {eta:g}")
        warm = report.density
        out.append(u)
    logger.info(f"continued {len(out)} discs within eta = {eta:g}")
    return out


# ---------------------------------------------------------------------------
# Linear Cauchy-Riemann problem
# ---------------------------------------------------------------------------

def _matvec(B: GridMap, f: np.ndarray) -> np.ndarray:
    return np.einsum("mij,mj->mi", B.values, f)


def solve_linear_cr(B1: GridMap, B2: GridMap, g: GridMap, settings: Optional[SolverSettings] = None,
                    with_report: bool = False):
    """f with f_zbar + B1 f + B2 conj(f) = g, f(0) = 0, f_z(0) = 0 (requires g(0) = 0).

    Iterates F = T_CG(g - B1 f - B2 conj f), f = F - (a z + b) with b = F(0),
    a = F_z(0).
    """
    settings = settings or DEFAULT_SETTINGS
    grid = g.grid
    scale = g.sup() or 1.0
    g0 = value_at_zero(g)
    if np.abs(g0).max() > max(1e-8, grid.h ** 2) * max(1.0, scale):
        raise HypothesisError(f"g(0) = {np.round(g0, 6).tolist()} must vanish")
    z = grid.z[:, None]
    f = np.zeros_like(g.values)
    monitor = _ChangeMonitor(settings, "linear CR iteration")
    threshold = settings.tol * scale
    converged, iterations = False, 0
    rho = g.values
    for iterations in range(1, settings.max_iterations + 1):
        rho = g.values - _matvec(B1, f) - _matvec(B2, np.conj(f))
        F = tcg(g.with_values(rho))
        b = value_at_zero(F)
        a = complex_gradient_at_zero(F)[0]
        f_new = F.values - (a * z + b)
        monitor.record(_node_sup(f_new - f))
        f = f_new
        if monitor.changes[-1] <= threshold:
            converged = True
            break
    if not converged:
        monitor.check_stall(threshold)
    defect = g.values - _matvec(B1, f) - _matvec(B2, np.conj(f)) - rho
    report = SolveReport(iterations=iterations, residual=_node_sup(defect, grid.interior),
                         converged=converged, contraction_estimate=monitor.contraction)
    result = g.with_values(f)
    return (result, report) if with_report else result
