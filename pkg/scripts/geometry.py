#!/usr/bin/env python3
"""
Geometry Module
===============
Almost complex structures on boxes of R^{2n}, coordinates ordered
(x1, y1, ..., xn, yn) with J_st acting blockwise as [[0, -1], [1, 0]].

Structures are built from presets (presets.yaml merged with the built-ins),
from frame polynomials (J = A J_st A^{-1}) or from explicit matrix entries.
Derived structures (dilations, affine pull-backs, the hyperplane-normalized
structure) are numeric wrappers around their parent.

Usage:
    from geometry import load_structure, dilate, q_matrix_many
    J = dilate(load_structure("r6"), 0.05)
"""

import json
import re
import sys
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
import yaml
from loguru import logger

try:
    from disc_common import PRESETS, ConfigError, DomainError, StructureError
    from utils.polyexpr import (coordinate_symbols, lambdify_matrix, lambdify_vector,
                                parse_expr, parse_matrix, polynomial_degree)
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent))
    from disc_common import PRESETS, ConfigError, DomainError, StructureError
    from utils.polyexpr import (coordinate_symbols, lambdify_matrix, lambdify_vector,
                                parse_expr, parse_matrix, polynomial_degree)

DERIV_STEP = 1e-5
SINGULAR_TOL = 1e-6

MatrixField = Callable[[np.ndarray], np.ndarray]
DirectionalField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@lru_cache(maxsize=16)
def _standard(n: int) -> np.ndarray:
    block = np.array([[0.0, -1.0], [1.0, 0.0]])
    return np.kron(np.eye(n), block)


def standard_matrix(n: int) -> np.ndarray:
    """J_st on R^{2n} (a fresh copy)."""
    return _standard(n).copy()


def _as_points(points: np.ndarray, n: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2 * n:
        raise ValueError(f"expected points of dimension {2 * n}, got {pts.shape[1]}")
    return pts


@dataclass(frozen=True, eq=False)
class StructureField:
    """A smooth J: box -> R^{2n x 2n} with J^2 = -I.

    ``fn`` evaluates a batch of points (M, 2n) to (M, 2n, 2n).
    ``directional`` (optional) returns the closed-form derivative D_d J at
    the points; otherwise central differences with ``deriv_step`` are used.
    """

    n: int
    fn: MatrixField
    lower: np.ndarray
    upper: np.ndarray
    name: str = "custom"
    smoothness: str = "C^omega"
    directional: Optional[DirectionalField] = None
    deriv_step: float = DERIV_STEP
    symbolic_source: Optional[Callable[[], Optional[sp.Matrix]]] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @cached_property
    def symbolic(self) -> Optional[sp.Matrix]:
        """Symbolic J when the structure comes from polynomial data, else None."""
        return self.symbolic_source() if self.symbolic_source else None

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = _as_points(points, self.n)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)

    def require_inside(self, points: np.ndarray, what: str = "point") -> None:
        inside = self.contains(points)
        if not np.all(inside):
            bad = _as_points(points, self.n)[~inside][0]
            raise DomainError(f"{what} outside the domain of {self.name}: {np.round(bad, 6).tolist()}")

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        pts = _as_points(points, self.n)
        self.require_inside(pts)
        return self.fn(pts)

    def eval(self, p: np.ndarray) -> np.ndarray:
        return self.eval_many(np.asarray(p, dtype=float)[None, :])[0]

    def derivative_many(self, points: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """D_d J at each point for the matching direction d (batched)."""
        pts = _as_points(points, self.n)
        dirs = np.broadcast_to(np.asarray(directions, dtype=float), pts.shape)
        if self.directional is not None:
            self.require_inside(pts)
            return self.directional(pts, dirs)
        norms = np.linalg.norm(dirs, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        unit = dirs / safe[:, None]
        s = self.deriv_step
        plus, minus = pts + s * unit, pts - s * unit
        self.require_inside(plus, "derivative stencil")
        self.require_inside(minus, "derivative stencil")
        out = (self.fn(plus) - self.fn(minus)) / (2.0 * s)
        return out * norms[:, None, None]

    def derivative(self, p: np.ndarray, direction: np.ndarray) -> np.ndarray:
        return self.derivative_many(np.asarray(p, dtype=float)[None, :],
                                    np.asarray(direction, dtype=float)[None, :])[0]

    def apply(self, points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        """J(p) v for batches of points and vectors."""
        return np.einsum("mij,mj->mi", self.eval_many(points), np.atleast_2d(vectors))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def _box(n: int, domain) -> Tuple[np.ndarray, np.ndarray]:
    if domain is None:
        return np.full(2 * n, -np.inf), np.full(2 * n, np.inf)
    lo, hi = domain
    lower = np.broadcast_to(np.asarray(lo, dtype=float), (2 * n,)).copy()
    upper = np.broadcast_to(np.asarray(hi, dtype=float), (2 * n,)).copy()
    if np.any(lower >= upper) or np.any(lower > 0) or np.any(upper < 0):
        raise ConfigError(f"domain must be a box containing 0, got {domain}")
    return lower, upper


def make_standard(n: int) -> StructureField:
    """J_st on all of R^{2n}."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    jst = _standard(n)

    def field_fn(pts):
        return np.broadcast_to(jst, (pts.shape[0], 2 * n, 2 * n)).copy()

    def directional(pts, dirs):
        return np.zeros((pts.shape[0], 2 * n, 2 * n))

    lower, upper = _box(n, None)
    return StructureField(n=n, fn=field_fn, lower=lower, upper=upper, name="standard",
                          directional=directional,
                          symbolic_source=lambda: sp.Matrix(jst.astype(int)))


def _partials(matrix: sp.Matrix, n: int):
    syms = coordinate_symbols(n)
    return [lambdify_matrix(matrix.diff(s), n) for s in syms]


def structure_from_entries(rows, n: int, params: Optional[Dict[str, float]] = None,
                           name: str = "custom", domain=None) -> StructureField:
    """J given entrywise by expressions in (x1, y1, ...)."""
    try:
        matrix = parse_matrix(rows, n, params)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    evaluate = lambdify_matrix(matrix, n)
    partials = _partials(matrix, n)

    def directional(pts, dirs):
        return sum(dirs[:, k, None, None] * partials[k](pts) for k in range(2 * n))

    lower, upper = _box(n, domain)
    J = StructureField(n=n, fn=evaluate, lower=lower, upper=upper, name=name,
                       directional=directional, symbolic_source=lambda: matrix)
    validate_structure(J)
    return J


def structure_from_frame(rows, n: int, params: Optional[Dict[str, float]] = None,
                         name: str = "custom", domain=None) -> StructureField:
    """J = A J_st A^{-1} for a frame A given by expressions.

    The derivative is closed form: D J = [D A . A^{-1}, J].
    """
    try:
        frame = parse_matrix(rows, n, params)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    frame_fn = lambdify_matrix(frame, n)
    partials = _partials(frame, n)
    jst = _standard(n)

    def _frame_inverse(pts):
        A = frame_fn(pts)
        try:
            Ainv = np.linalg.inv(A)
        except np.linalg.LinAlgError as e:
            raise StructureError(f"{name}: singular frame") from e
        return A, Ainv

    def field_fn(pts):
        A, Ainv = _frame_inverse(pts)
        return A @ jst @ Ainv

    def directional(pts, dirs):
        A, Ainv = _frame_inverse(pts)
        J = A @ jst @ Ainv
        dA = sum(dirs[:, k, None, None] * partials[k](pts) for k in range(2 * n))
        X = dA @ Ainv
        return X @ J - J @ X

    def symbolic():
        jst_sym = sp.Matrix(jst.astype(int))
        return sp.simplify(frame * jst_sym * frame.inv())

    lower, upper = _box(n, domain)
    J = StructureField(n=n, fn=field_fn, lower=lower, upper=upper, name=name,
                       directional=directional, symbolic_source=symbolic)
    validate_structure(J)
    return J


def _affine(J: StructureField, center: np.ndarray, scale: float, name: str,
            lower: np.ndarray, upper: np.ndarray) -> StructureField:
    c = np.asarray(center, dtype=float)

    def field_fn(pts):
        return J.fn(c + scale * pts)

    directional = None
    if J.directional is not None:
        def directional(pts, dirs):
            return scale * J.directional(c + scale * pts, dirs)

    def symbolic():
        base = J.symbolic
        if base is None:
            return None
        syms = coordinate_symbols(J.n)
        subs = {s: sp.Float(ci) + sp.Float(scale) * s for s, ci in zip(syms, c)}
        return base.subs(subs, simultaneous=True)

    return StructureField(n=J.n, fn=field_fn, lower=lower, upper=upper, name=name,
                          smoothness=J.smoothness, directional=directional,
                          deriv_step=J.deriv_step, symbolic_source=symbolic)


def dilate(J: StructureField, eps: float) -> StructureField:
    """J_eps(p) = J(eps * p) on the same domain."""
    if not 0 < eps:
        raise ValueError("eps must be positive")
    with np.errstate(invalid="ignore"):
        if np.any(eps * J.lower < J.lower) or np.any(eps * J.upper > J.upper):
            raise DomainError(f"eps * domain is not inside the domain of {J.name}")
    return _affine(J, np.zeros(J.dim), eps, f"{J.name}@{eps:g}", J.lower, J.upper)


def affine_pullback(J: StructureField, center: np.ndarray, scale: float) -> StructureField:
    """J~(w) = J(center + scale * w), domain pulled back accordingly."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    c = np.asarray(center, dtype=float)
    J.require_inside(c[None, :], "center")
    lower = (J.lower - c) / scale
    upper = (J.upper - c) / scale
    return _affine(J, c, scale, f"{J.name}|{scale:.3g}", lower, upper)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def q_matrix_many(J: StructureField, points: np.ndarray) -> np.ndarray:
    """Q_J = (J + J_st)^{-1} (J - J_st) at a batch of points."""
    mats = J.eval_many(points)
    jst = _standard(J.n)
    plus = mats + jst
    smin = np.linalg.svd(plus, compute_uv=False)[:, -1]
    if np.any(smin < SINGULAR_TOL):
        k = int(np.argmin(smin))
        raise StructureError(f"J + J_st is singular at {np.round(_as_points(points, J.n)[k], 6).tolist()}")
    return np.linalg.solve(plus, mats - jst)


def q_matrix(J: StructureField, p: np.ndarray) -> np.ndarray:
    return q_matrix_many(J, np.asarray(p, dtype=float)[None, :])[0]


class _ConstField:
    def __init__(self, vec):
        self.vec = np.asarray(vec, dtype=float)

    def at(self, p):
        return self.vec

    def d(self, p, w):
        return np.zeros_like(self.vec)


class _ExprField:
    def __init__(self, expr: "VectorFieldExpr"):
        self.expr = expr

    def at(self, p):
        return self.expr(p)

    def d(self, p, w):
        return self.expr.jacobian(p) @ w


class _StructureApplied:
    """The field p -> J(p) V(p)."""

    def __init__(self, J: StructureField, base):
        self.J, self.base = J, base

    def at(self, p):
        return self.J.eval(p) @ self.base.at(p)

    def d(self, p, w):
        return self.J.derivative(p, w) @ self.base.at(p) + self.J.eval(p) @ self.base.d(p, w)


def _as_field(Y):
    if isinstance(Y, VectorFieldExpr):
        return _ExprField(Y)
    return _ConstField(Y)


def _bracket_at(A, B, p):
    return B.d(p, A.at(p)) - A.d(p, B.at(p))


def nijenhuis(J: StructureField, p: np.ndarray, Y, T) -> np.ndarray:
    """N_J(Y, T) = [Y,T] + J[JY,T] + J[Y,JT] - [JY,JT] at p.

    Y and T are constant vectors or VectorFieldExpr fields.
    """
    p = np.asarray(p, dtype=float)
    J.require_inside(p[None, :])
    Yf, Tf = _as_field(Y), _as_field(T)
    JY, JT = _StructureApplied(J, Yf), _StructureApplied(J, Tf)
    Jp = J.eval(p)
    return (_bracket_at(Yf, Tf, p) + Jp @ _bracket_at(JY, Tf, p)
            + Jp @ _bracket_at(Yf, JT, p) - _bracket_at(JY, JT, p))


def _inf_norm(mats: np.ndarray) -> np.ndarray:
    return np.abs(mats).sum(axis=-1).max(axis=-1)


def structure_gap(J: StructureField, samples: np.ndarray) -> float:
    """max over samples of ||J - J_st|| + max_k ||d_k J|| (matrix inf-norms)."""
    pts = _as_points(samples, J.n)
    gap = _inf_norm(J.eval_many(pts) - _standard(J.n))
    deriv = np.zeros(pts.shape[0])
    for k in range(J.dim):
        e = np.zeros(J.dim)
        e[k] = 1.0
        deriv = np.maximum(deriv, _inf_norm(J.derivative_many(pts, e)))
    return float(np.max(gap + deriv))


def sample_points(J: StructureField, count: int, seed: int = 0, radius: float = 1.0) -> np.ndarray:
    """Uniform samples in the domain intersected with [-radius, radius]^{2n}."""
    rng = np.random.default_rng(seed)
    lo = np.maximum(J.lower, -radius)
    hi = np.minimum(J.upper, radius)
    return lo + (hi - lo) * rng.random((count, J.dim))


def validate_structure(J: StructureField, samples: Optional[np.ndarray] = None,
                       count: int = 32, seed: int = 0, tol: float = 1e-8) -> None:
    """Raise StructureError unless J^2 = -I and J + J_st is invertible on samples."""
    pts = sample_points(J, count, seed) if samples is None else _as_points(samples, J.n)
    mats = J.eval_many(pts)
    square = mats @ mats + np.eye(J.dim)
    scale = 1.0 + np.abs(mats).max(axis=(1, 2)) ** 2
    err = np.abs(square).max(axis=(1, 2)) / scale
    if np.any(err > tol):
        raise StructureError(f"{J.name}: J^2 != -I (defect {err.max():.2e})")
    q_matrix_many(J, pts)


def normalize_split(J: StructureField, shrink: float = 0.5, check_count: int = 16) -> StructureField:
    """Pull J back by Phi(w) = (w', 0) + x_n e_xn + y_n J(w', 0) e_xn.

    Requires {z_n = 0} to be J-complex. On {z_n = 0} the result is block
    diagonal with the standard block in the last complex coordinate.
    """
    n, dim = J.n, J.dim
    if n < 2:
        raise StructureError("normalize_split needs n >= 2")
    xn = dim - 2
    sample = sample_points(J, check_count, seed=1, radius=1.0 * shrink)
    sample[:, xn:] = 0.0
    mats = J.eval_many(sample)
    scale = 1.0 + np.abs(mats).max()
    if np.abs(mats[:, xn:, :xn]).max() > 1e-9 * scale:
        raise StructureError(f"{{z_n = 0}} is not {J.name}-complex")

    def _phi_and_jacobian(pts):
        base = pts.copy()
        base[:, xn:] = 0.0
        J0 = J.eval_many(base)
        v = J0[:, :, xn]
        x_n, y_n = pts[:, xn], pts[:, xn + 1]
        phi = base + y_n[:, None] * v
        phi[:, xn] += x_n
        D = np.zeros((pts.shape[0], dim, dim))
        D[:, :, :xn] = np.eye(dim)[:, :xn]
        for j in range(xn):
            e = np.zeros(dim)
            e[j] = 1.0
            D[:, :, j] += y_n[:, None] * J.derivative_many(base, e)[:, :, xn]
        D[:, xn, xn] = 1.0
        D[:, :, xn + 1] = v
        return phi, D

    def field_fn(pts):
        phi, D = _phi_and_jacobian(pts)
        J.require_inside(phi, "normalizing chart image")
        return np.linalg.solve(D, J.fn(phi) @ D)

    lower = np.where(np.isfinite(J.lower), J.lower * shrink, J.lower)
    upper = np.where(np.isfinite(J.upper), J.upper * shrink, J.upper)
    normalized = StructureField(n=n, fn=field_fn, lower=lower, upper=upper,
                                name=f"{J.name}|split", smoothness=J.smoothness,
                                deriv_step=J.deriv_step)

    samples = sample_points(normalized, check_count, seed=2, radius=1.0)
    phi, _ = _phi_and_jacobian(samples)
    J.require_inside(phi, "normalizing chart image")
    block = normalized.eval_many(sample)
    if np.abs(block[:, xn:, xn:] - _standard(1)).max() > 1e-8 or np.abs(block[:, :xn, xn:]).max() > 1e-8:
        raise StructureError(f"normalization of {J.name} failed the block check")
    logger.debug(f"normalized {J.name} along z_{n} = 0")
    return normalized


# ---------------------------------------------------------------------------
# Vector fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VectorFieldExpr:
    """Polynomial vector field on R^{2n} (components in x1, y1, ...)."""

    components: Tuple[sp.Expr, ...]
    n: int

    @classmethod
    def from_strings(cls, components: Sequence, n: int, params=None, max_degree: int = 3) -> "VectorFieldExpr":
        if len(components) != 2 * n:
            raise ValueError(f"need {2 * n} components")
        exprs = tuple(parse_expr(c, n, params) for c in components)
        for e in exprs:
            deg = polynomial_degree(e, n)
            if deg is None or deg > max_degree:
                raise ValueError(f"component {e} is not a polynomial of degree <= {max_degree}")
        return cls(components=exprs, n=n)

    @classmethod
    def constant(cls, vector: Sequence[float]) -> "VectorFieldExpr":
        vec = [sp.Float(v) for v in vector]
        return cls(components=tuple(vec), n=len(vec) // 2)

    @cached_property
    def _value_fn(self):
        return lambdify_vector(self.components, self.n)

    @cached_property
    def _jacobian_fn(self):
        syms = coordinate_symbols(self.n)
        return lambdify_matrix(sp.Matrix(self.components).jacobian(syms), self.n)

    def __call__(self, p: np.ndarray) -> np.ndarray:
        return self._value_fn(np.asarray(p, dtype=float)[None, :])[0]

    def at_many(self, points: np.ndarray) -> np.ndarray:
        return self._value_fn(points)

    def jacobian(self, p: np.ndarray) -> np.ndarray:
        return self._jacobian_fn(np.asarray(p, dtype=float)[None, :])[0]

    def bracket(self, other: "VectorFieldExpr") -> "VectorFieldExpr":
        """[self, other] = D(other) self - D(self) other."""
        syms = coordinate_symbols(self.n)
        A, B = sp.Matrix(self.components), sp.Matrix(other.components)
        out = B.jacobian(syms) * A - A.jacobian(syms) * B
        return VectorFieldExpr(components=tuple(sp.expand(c) for c in out), n=self.n)

    def apply_structure(self, J: StructureField) -> "VectorFieldExpr":
        """The field J . Y, available when J has a symbolic form."""
        if J.symbolic is None:
            raise StructureError(f"{J.name} has no symbolic form")
        out = J.symbolic * sp.Matrix(self.components)
        return VectorFieldExpr(components=tuple(sp.expand(c) for c in out), n=self.n)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _frame_rows(n: int, entries: Dict[Tuple[int, int], str]) -> list:
    rows = [["1" if i == j else "0" for j in range(2 * n)] for i in range(2 * n)]
    for (i, j), text in entries.items():
        rows[i][j] = text if i != j else f"1 + {text}"
    return rows


_BUILTIN_PRESETS = {
    "standard": {
        "kind": "standard",
        "n": 2,
        "description": "Constant standard structure J_st",
    },
    "r6": {
        "kind": "frame",
        "n": 3,
        "domain": [-10.0, 10.0],
        "frame": _frame_rows(3, {(4, 2): "x1", (4, 3): "-y1"}),
        "description": "Non-integrable structure of R^6 with L1 = dx2 + x1 dx3, L2 = dy2 - y1 dx3",
    },
    "chirka-perturbed": {
        "kind": "frame",
        "n": 2,
        "params": {"eps": 0.05},
        "domain": [-1.5, 1.5],
        "frame": _frame_rows(2, {
            (0, 2): "eps*y2", (0, 3): "eps*x1", (1, 2): "eps*x2",
            (2, 0): "eps*x2", (2, 1): "eps*y1", (3, 1): "eps*x1", (3, 2): "eps*y2",
        }),
        "description": "Generic linear frame perturbation of J_st with J(0) = J_st",
    },
    "hypersurface-perturbed": {
        "kind": "frame",
        "n": 2,
        "params": {"eps": 0.05},
        "domain": [-1.5, 1.5],
        "frame": _frame_rows(2, {
            (0, 1): "eps*y1", (0, 2): "eps*x1", (1, 0): "eps*x1", (1, 3): "eps*y1",
            (2, 0): "eps*y2", (2, 3): "eps*x1", (3, 1): "eps*x2", (3, 2): "eps*y1",
        }),
        "description": "Perturbation keeping {z2 = 0} J-complex, not yet split",
    },
}

# Merge loaded presets with built-in presets (loaded take precedence)
STRUCTURE_PRESETS = {**_BUILTIN_PRESETS, **(PRESETS.get("structures") or {})}

_SPEC_PATTERN = re.compile(r"^\s*([A-Za-z][\w-]*)\s*(?:\(\s*([^)]*)\s*\))?\s*(?::\s*(\d+))?\s*$")


def parse_structure_spec(spec: str) -> Tuple[str, Optional[float], Optional[int]]:
    """'chirka-perturbed(0.05)' -> ('chirka-perturbed', 0.05, None); 'standard:3' -> ('standard', None, 3)."""
    m = _SPEC_PATTERN.match(spec)
    if not m:
        raise ConfigError(f"bad structure spec: {spec!r}")
    name, arg, dim = m.groups()
    try:
        eps = float(arg) if arg else None
    except ValueError as e:
        raise ConfigError(f"bad parameter in {spec!r}") from e
    return name, eps, int(dim) if dim else None


def structure_from_definition(definition: Dict, name: str = "custom",
                              eps: Optional[float] = None, n: Optional[int] = None) -> StructureField:
    """Build a structure from a preset-style mapping (kind/n/frame/entries/params/domain)."""
    kind = definition.get("kind") or ("frame" if "frame" in definition else
                                      "entries" if "entries" in definition else None)
    dim = int(n or definition.get("n", 1))
    params = dict(definition.get("params") or {})
    if eps is not None:
        params["eps"] = eps
    domain = definition.get("domain")
    if kind == "standard":
        return make_standard(dim)
    if kind == "frame":
        label = f"{name}({params['eps']:g})" if "eps" in params else name
        return structure_from_frame(definition["frame"], dim, params, label, domain)
    if kind == "entries":
        return structure_from_entries(definition["entries"], dim, params, name, domain)
    raise ConfigError(f"structure {name!r}: unknown kind {kind!r}")


def load_structure(spec: Union[str, Path], presets: Optional[Dict] = None) -> StructureField:
    """Resolve a preset spec string or a JSON/YAML custom structure file."""
    presets = STRUCTURE_PRESETS if presets is None else presets
    path = Path(str(spec))
    if path.suffix.lower() in (".json", ".yaml", ".yml"):
        if not path.exists():
            raise ConfigError(f"structure file not found: {path}")
        with open(path) as f:
            data = json.load(f) if path.suffix.lower() == ".json" else yaml.safe_load(f)
        return structure_from_definition(data, name=data.get("name", path.stem))
    name, eps, dim = parse_structure_spec(str(spec))
    if name not in presets:
        raise ConfigError(f"unknown structure preset {name!r}; available: {', '.join(sorted(presets))}")
    return structure_from_definition(presets[name], name=name, eps=eps, n=dim)


def make_r6() -> StructureField:
    """The non-integrable R^6 structure (preset 'r6')."""
    return structure_from_definition(_BUILTIN_PRESETS["r6"], name="r6")
