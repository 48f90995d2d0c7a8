#!/usr/bin/env python3
"""
Expression Utilities
Parsing of coordinate expressions (presets, custom structures, scalar fields)
and vectorized evaluation through sympy.lambdify.
"""

from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
import sympy as sp
from numpy.polynomial import Polynomial

# Names allowed in expressions besides coordinates and parameters
_ALLOWED_FUNCS = {
    "sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "log": sp.log,
    "sqrt": sp.sqrt, "atanh": sp.atanh, "tanh": sp.tanh, "Abs": sp.Abs,
    "pi": sp.pi, "I": sp.I,
}


def coordinate_symbols(n: int) -> List[sp.Symbol]:
    """Real coordinates of C^n in the order (x1, y1, ..., xn, yn)."""
    out = []
    for k in range(1, n + 1):
        out.extend(sp.symbols(f"x{k} y{k}", real=True))
    return out


def parse_expr(text, n: int, params: Optional[Dict[str, float]] = None) -> sp.Expr:
    """Parse a real expression in the coordinates of C^n.

    ``params`` are substituted as numbers (e.g. ``eps``). Unknown names raise
    ValueError.
    """
    syms = coordinate_symbols(n)
    local = {str(s): s for s in syms}
    local.update(_ALLOWED_FUNCS)
    for name, value in (params or {}).items():
        local[name] = sp.Float(value) if not isinstance(value, int) else sp.Integer(value)
    if isinstance(text, (int, float)):
        return sp.Float(text) if isinstance(text, float) else sp.Integer(text)
    try:
        expr = sp.sympify(str(text), locals=local)
    except (sp.SympifyError, SyntaxError, TypeError) as e:
        raise ValueError(f"cannot parse expression {text!r}: {e}") from e
    unknown = expr.free_symbols - set(syms)
    if unknown:
        raise ValueError(f"unknown names in {text!r}: {sorted(map(str, unknown))}")
    return expr


def parse_matrix(rows: Sequence[Sequence], n: int, params: Optional[Dict[str, float]] = None) -> sp.Matrix:
    """Parse a 2n x 2n matrix of expressions."""
    size = 2 * n
    if len(rows) != size or any(len(r) != size for r in rows):
        raise ValueError(f"matrix must be {size}x{size}")
    return sp.Matrix([[parse_expr(e, n, params) for e in row] for row in rows])


def polynomial_degree(expr: sp.Expr, n: int) -> Optional[int]:
    """Total degree of a polynomial expression, None if not polynomial."""
    syms = coordinate_symbols(n)
    if expr.is_number:
        return 0
    try:
        return sp.Poly(expr, *syms).total_degree()
    except sp.PolynomialError:
        return None


def _broadcast(value, count: int) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(count, float(arr))
    return arr


def lambdify_scalar(expr: sp.Expr, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized scalar: points (M, 2n) -> (M,)."""
    syms = coordinate_symbols(n)
    fn = sp.lambdify(tuple(syms), expr, "numpy", dummify=False)

    def evaluate(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return _broadcast(fn(*pts.T), pts.shape[0])

    return evaluate


def lambdify_matrix(matrix: sp.Matrix, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized matrix field: points (M, 2n) -> (M, rows, cols).

    Constant entries are broadcast over the batch.
    """
    rows, cols = matrix.shape
    entries = [[lambdify_scalar(matrix[i, j], n) for j in range(cols)] for i in range(rows)]

    def evaluate(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((pts.shape[0], rows, cols))
        for i in range(rows):
            for j in range(cols):
                out[:, i, j] = entries[i][j](pts)
        return out

    return evaluate


def lambdify_vector(components: Iterable[sp.Expr], n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized vector field: points (M, 2n) -> (M, len(components))."""
    fns = [lambdify_scalar(c, n) for c in components]

    def evaluate(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([fn(pts) for fn in fns], axis=1)

    return evaluate


def gradient_exprs(expr: sp.Expr, n: int) -> List[sp.Expr]:
    return [sp.diff(expr, s) for s in coordinate_symbols(n)]


def hessian_exprs(expr: sp.Expr, n: int) -> sp.Matrix:
    return sp.hessian(expr, coordinate_symbols(n))


# ---------------------------------------------------------------------------
# Polynomials in the disc variable z
# ---------------------------------------------------------------------------

def parse_zpoly(text) -> Polynomial:
    """Complex polynomial in ``z`` from a string like ``"z + 0.5*I*z**2"``."""
    if isinstance(text, Polynomial):
        return text
    z = sp.Symbol("z")
    try:
        expr = sp.sympify(str(text), locals={"z": z, "I": sp.I, "i": sp.I})
        poly = sp.Poly(sp.expand(expr), z)
    except (sp.SympifyError, sp.PolynomialError, SyntaxError, TypeError) as e:
        raise ValueError(f"not a polynomial in z: {text!r}") from e
    coeffs = [complex(c) for c in reversed(poly.all_coeffs())]
    return Polynomial(np.array(coeffs, dtype=complex))


def zpoly(coeffs: Sequence[complex]) -> Polynomial:
    """Polynomial from ascending complex coefficients."""
    return Polynomial(np.asarray(coeffs, dtype=complex))
