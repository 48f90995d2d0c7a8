#!/usr/bin/env python3
"""
Levi Forms and Plurisubharmonicity
==================================
dd^c_J lambda (Y, T) for constant vectors (tensorial formula with one
derivative of J), the exterior-derivative form for vector fields, and the
checks built on them: pull-back identity along discs, Chirka's function,
Frobenius-type defect on hypersurfaces and the Levi form of |Z - p|^2.

Convention: d^c lambda (V) = -d lambda (J V). For constant Y, T

    dd^c lambda (Y, T) = -H(Y, J T) - grad.(D_Y J) T + H(T, J Y) + grad.(D_T J) Y

with H the Hessian of lambda; for J_st and lambda = |Z|^2, dd^c(Y, J Y) = 4|Y|^2.
"""

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Tuple

import numpy as np
from loguru import logger

try:
    from disc_common import CONFIG, DomainError, HypothesisError, get_path
    from discgrid import GridMap, derivatives, partials, to_real
    from disc_solver import residual
    from geometry import StructureField, VectorFieldExpr, standard_matrix
    from utils.polyexpr import (gradient_exprs, hessian_exprs, lambdify_matrix,
                                lambdify_scalar, lambdify_vector, parse_expr)
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent))
    from disc_common import CONFIG, DomainError, HypothesisError, get_path
    from discgrid import GridMap, derivatives, partials, to_real
    from disc_solver import residual
    from geometry import StructureField, VectorFieldExpr, standard_matrix
    from utils.polyexpr import (gradient_exprs, hessian_exprs, lambdify_matrix,
                                lambdify_scalar, lambdify_vector, parse_expr)

LAMBDA_STEP = float(get_path(CONFIG, "psh.lambda_step", 1e-4))
PULLBACK_RESIDUAL_TOL = float(get_path(CONFIG, "psh.pullback_residual_tol", 1e-2))
TANGENT_TOL = float(get_path(CONFIG, "psh.tangent_tol", 1e-8))

Batch = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A real function on a box of R^{2n}; exact derivatives when available."""

    n: int
    value: Batch
    grad: Optional[Batch] = None
    hessian: Optional[Batch] = None
    lower: Optional[np.ndarray] = field(default=None, repr=False)
    upper: Optional[np.ndarray] = field(default=None, repr=False)
    step: float = LAMBDA_STEP
    label: str = "lambda"

    @classmethod
    def from_expression(cls, text, n: int, params=None, domain=None, label: Optional[str] = None) -> "ScalarField":
        """Scalar field from an expression in (x1, y1, ...) with sympy derivatives."""
        expr = parse_expr(text, n, params)
        grad = lambdify_vector(gradient_exprs(expr, n), n)
        hess = lambdify_matrix(hessian_exprs(expr, n), n)
        lower = upper = None
        if domain is not None:
            lower = np.full(2 * n, float(domain[0]))
            upper = np.full(2 * n, float(domain[1]))
        return cls(n=n, value=lambdify_scalar(expr, n), grad=grad, hessian=hess,
                   lower=lower, upper=upper, label=label or str(expr))

    def _check(self, points: np.ndarray, what: str = "point") -> None:
        if self.lower is None:
            return
        ok = np.all((points >= self.lower) & (points <= self.upper), axis=1)
        if not np.all(ok):
            raise DomainError(f"{what} outside the domain of {self.label}")

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        self._check(pts)
        return self.value(pts)

    def gradient_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.grad is not None:
            self._check(pts)
            return self.grad(pts)
        s, dim = self.step, pts.shape[1]
        out = np.empty_like(pts)
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = s
            self._check(pts + e, "stencil")
            self._check(pts - e, "stencil")
            out[:, i] = (self.value(pts + e) - self.value(pts - e)) / (2 * s)
        return out

    def hessian_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.hessian is not None:
            self._check(pts)
            return self.hessian(pts)
        s, dim = self.step, pts.shape[1]
        out = np.empty((pts.shape[0], dim, dim))
        eye = np.eye(dim) * s
        for i in range(dim):
            for j in range(i, dim):
                corners = [pts + eye[i] + eye[j], pts + eye[i] - eye[j],
                           pts - eye[i] + eye[j], pts - eye[i] - eye[j]]
                for c in corners:
                    self._check(c, "stencil")
                fpp, fpm, fmp, fmm = (self.value(c) for c in corners)
                out[:, i, j] = out[:, j, i] = (fpp - fpm - fmp + fmm) / (4 * s * s)
        return out


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------

def _coords(n: int):
    return [f"x{k}" for k in range(1, n + 1)], [f"y{k}" for k in range(1, n + 1)]


def _norm_sq_text(n: int, center=None) -> str:
    c = np.zeros(2 * n) if center is None else np.asarray(center, dtype=float)
    xs, ys = _coords(n)
    terms = []
    for k in range(n):
        terms.append(f"({xs[k]} - ({float(c[2 * k])!r}))**2")
        terms.append(f"({ys[k]} - ({float(c[2 * k + 1])!r}))**2")
    return " + ".join(terms)


def coordinate_function(n: int, name: str) -> ScalarField:
    """A single real coordinate, e.g. 'y3' or 'x1'."""
    return ScalarField.from_expression(name, n, label=name)


def norm_squared(n: int, center=None) -> ScalarField:
    """|Z - center|^2."""
    return ScalarField.from_expression(_norm_sq_text(n, center), n, label="|Z-p|^2")


def log_norm(n: int) -> ScalarField:
    return ScalarField.from_expression(f"log(sqrt({_norm_sq_text(n)}))", n, label="log|Z|")


def chirka_function(n: int, A: float) -> ScalarField:
    """log|Z| + A |Z|."""
    r = f"sqrt({_norm_sq_text(n)})"
    return ScalarField.from_expression(f"log({r}) + ({float(A)!r})*{r}", n, label=f"log|Z|+{A:g}|Z|")


# ---------------------------------------------------------------------------
# Levi forms
# ---------------------------------------------------------------------------

def ddc_batch(J: StructureField, lam: ScalarField, points: np.ndarray,
              Y: np.ndarray, T: np.ndarray) -> np.ndarray:
    """dd^c_J lambda (Y, T) at each point for constant extensions of Y and T."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    Y = np.broadcast_to(np.asarray(Y, dtype=float), pts.shape)
    T = np.broadcast_to(np.asarray(T, dtype=float), pts.shape)
    Jp = J.eval_many(pts)
    H = lam.hessian_many(pts)
    grad = lam.gradient_many(pts)
    JT = np.einsum("mij,mj->mi", Jp, T)
    JY = np.einsum("mij,mj->mi", Jp, Y)
    DYJ_T = np.einsum("mij,mj->mi", J.derivative_many(pts, Y), T)
    DTJ_Y = np.einsum("mij,mj->mi", J.derivative_many(pts, T), Y)
    return (-np.einsum("mi,mij,mj->m", Y, H, JT) + np.einsum("mi,mij,mj->m", T, H, JY)
            - np.sum(grad * DYJ_T, axis=1) + np.sum(grad * DTJ_Y, axis=1))


def ddc_form(J: StructureField, lam: ScalarField, p: np.ndarray, Y, T) -> float:
    """dd^c_J lambda (Y, T) at p; Y, T constant vectors or polynomial fields.

    The value is tensorial, so only the fields' values at p matter.
    """
    p = np.asarray(p, dtype=float)
    yv = Y(p) if isinstance(Y, VectorFieldExpr) else np.asarray(Y, dtype=float)
    tv = T(p) if isinstance(T, VectorFieldExpr) else np.asarray(T, dtype=float)
    return float(ddc_batch(J, lam, p[None, :], yv, tv)[0])


def ddc_levi(J: StructureField, lam: ScalarField, p: np.ndarray, Y: np.ndarray) -> float:
    """dd^c_J lambda (Y, J(p) Y)."""
    p = np.asarray(p, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return float(ddc_batch(J, lam, p[None, :], Y, J.eval(p) @ Y)[0])


def levi_many(J: StructureField, lam: ScalarField, points: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """dd^c_J lambda (Y, J Y) for batches of points and vectors."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    Y = np.broadcast_to(np.asarray(Y, dtype=float), pts.shape)
    return ddc_batch(J, lam, pts, Y, J.apply(pts, Y))


@dataclass(frozen=True)
class PullbackReport:
    maxdiff: float
    lhs_max: float
    rhs_max: float
    nodes: int


def pullback_check(J: StructureField, lam: ScalarField, u: GridMap, radius: Optional[float] = None,
                   residual_tol: float = PULLBACK_RESIDUAL_TOL) -> PullbackReport:
    """Compare Laplacian(lambda o u) with dd^c lambda (u_x, J u_x) at interior nodes."""
    res = residual(J, u, radius=0.75)
    if res > residual_tol:
        raise HypothesisError(f"disc is not J-holomorphic on the grid (residual {res:.2e})")
    lam_u = GridMap(u.grid, lam.eval_many(u.real).astype(complex))
    _, _, lap, valid = derivatives(lam_u)
    fx, _ = partials(u)
    rhs = levi_many(J, lam, u.real, to_real(fx))
    mask = valid.copy()
    if radius is not None:
        mask &= u.grid.inside(radius)
    lhs = lap.values[:, 0].real
    diff = np.abs(lhs - rhs)[mask]
    return PullbackReport(maxdiff=float(diff.max()), lhs_max=float(np.abs(lhs[mask]).max()),
                          rhs_max=float(np.abs(rhs[mask]).max()), nodes=int(mask.sum()))


def chirka_samples(n: int, count: int, r_min: float = 0.05, r_max: float = 0.5,
                   seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded (Z, Y) samples with r_min <= |Z| <= r_max and unit Y."""
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(count, 2 * n))
    Z *= (rng.uniform(r_min, r_max, size=count) / np.linalg.norm(Z, axis=1))[:, None]
    Y = rng.normal(size=(count, 2 * n))
    Y /= np.linalg.norm(Y, axis=1)[:, None]
    return Z, Y


def chirka_check(J: StructureField, A: float, samples: Tuple[np.ndarray, np.ndarray]) -> float:
    """min over samples of dd^c(log|Z| + A|Z|)(Y, JY) |Z| / |Y|^2."""
    Z, Y = (np.atleast_2d(np.asarray(a, dtype=float)) for a in samples)
    norms = np.linalg.norm(Z, axis=1)
    if np.any(norms == 0):
        raise HypothesisError("Chirka samples must avoid Z = 0")
    origin = np.zeros((1, J.dim))
    if np.all(J.contains(origin)) and np.abs(J.eval(origin[0]) - standard_matrix(J.n)).max() > 1e-8:
        raise HypothesisError("Chirka's function needs J(0) = J_st")
    lam = chirka_function(J.n, A)
    values = levi_many(J, lam, Z, Y) * norms / np.sum(Y * Y, axis=1)
    logger.debug(f"chirka A={A:g}: min {values.min():.4g} over {len(values)} samples")
    return float(values.min())


def is_complex_tangent(J: StructureField, rho: ScalarField, p: np.ndarray, Y: np.ndarray,
                       tol: float = TANGENT_TOL) -> bool:
    """Y in T_p{rho = const} and J(p) Y too."""
    p, Y = np.asarray(p, dtype=float), np.asarray(Y, dtype=float)
    grad = rho.gradient_many(p[None, :])[0]
    scale = max(np.linalg.norm(grad) * np.linalg.norm(Y), 1e-300)
    return bool(abs(grad @ Y) <= tol * scale and abs(grad @ (J.eval(p) @ Y)) <= tol * scale)


def _dc_pairing(J: StructureField, rho: ScalarField, points: np.ndarray, V: np.ndarray) -> np.ndarray:
    """d^c rho (V) = -grad rho . J V."""
    return -np.sum(rho.gradient_many(points) * J.apply(points, V), axis=1)


@dataclass(frozen=True)
class FrobeniusResult:
    ddc: float
    bracket_pairing: float


def frobenius_defect(J: StructureField, rho: ScalarField, p: np.ndarray,
                     Y: VectorFieldExpr, T: VectorFieldExpr) -> FrobeniusResult:
    """dd^c rho (Y, T) = Y(d^c rho(T)) - T(d^c rho(Y)) - d^c rho([Y, T]) at p.

    Returns the value and the bracket term -d^c rho([Y, T])(p); when
    d^c rho vanishes on Y and T near p the two agree.
    """
    p = np.asarray(p, dtype=float)
    yp, tp = Y(p), T(p)
    if not is_complex_tangent(J, rho, p, yp) or not is_complex_tangent(J, rho, p, tp):
        raise HypothesisError("Y and T must be complex tangent at p")
    s = rho.step

    def a(q):
        return _dc_pairing(J, rho, q, T.at_many(q))

    def b(q):
        return _dc_pairing(J, rho, q, Y.at_many(q))

    Ya = (a(np.stack([p + s * yp]))[0] - a(np.stack([p - s * yp]))[0]) / (2 * s)
    Tb = (b(np.stack([p + s * tp]))[0] - b(np.stack([p - s * tp]))[0]) / (2 * s)
    br = Y.bracket(T)(p)
    pairing = -float(_dc_pairing(J, rho, p[None, :], br[None, :])[0])
    return FrobeniusResult(ddc=float(Ya - Tb + pairing), bracket_pairing=pairing)


def dist_sq_levi(J: StructureField, p: np.ndarray, q: np.ndarray, Y: np.ndarray) -> float:
    """dd^c_J |. - p|^2 (Y, J Y) at q."""
    lam = norm_squared(J.n, p)
    return ddc_levi(J, lam, q, Y)
