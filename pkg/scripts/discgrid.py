#!/usr/bin/env python3
"""
Disc Grid
=========
Cell-center discretization of the closed unit disc and the finite-difference
calculus used by the solvers.

N is even, so the origin is a cell corner. Maps are stored as complex arrays
of shape (M, n): component k holds x_k + i y_k. Matrix-valued maps use shape
(M, n, n).
"""

import csv
import math
import sys
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np

try:
    from disc_common import DomainError, HypothesisError
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent))
    from disc_common import DomainError, HypothesisError

MIN_N = 16
OFFSET_RADII = 16
OFFSET_ANGLES = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)


# ---------------------------------------------------------------------------
# Real/complex layout
# ---------------------------------------------------------------------------

def to_real(values: np.ndarray) -> np.ndarray:
    """(..., n) complex -> (..., 2n) real in the order (x1, y1, ..., xn, yn)."""
    values = np.asarray(values)
    out = np.empty(values.shape[:-1] + (2 * values.shape[-1],))
    out[..., 0::2] = values.real
    out[..., 1::2] = values.imag
    return out


def to_complex(values: np.ndarray) -> np.ndarray:
    """(..., 2n) real -> (..., n) complex."""
    values = np.asarray(values, dtype=float)
    return values[..., 0::2] + 1j * values[..., 1::2]


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscGrid:
    """Cell centers z_jk = (x_j, y_k), h = 2/N, kept where |z| <= 1."""

    N: int
    h: float
    ix: np.ndarray
    iy: np.ndarray
    z: np.ndarray
    index: np.ndarray

    @property
    def size(self) -> int:
        return int(self.z.size)

    @property
    def nodes(self) -> np.ndarray:
        return self.z

    def _neighbor(self, dx: int, dy: int) -> np.ndarray:
        jx, jy = self.ix + dx, self.iy + dy
        ok = (jx >= 0) & (jx < self.N) & (jy >= 0) & (jy < self.N)
        out = np.full(self.size, -1, dtype=np.int64)
        out[ok] = self.index[jy[ok], jx[ok]]
        return out

    @cached_property
    def neighbors(self) -> dict:
        """Index arrays of the four axis neighbors (-1 when missing)."""
        return {
            "right": self._neighbor(1, 0), "left": self._neighbor(-1, 0),
            "up": self._neighbor(0, 1), "down": self._neighbor(0, -1),
            "right2": self._neighbor(2, 0), "left2": self._neighbor(-2, 0),
            "up2": self._neighbor(0, 2), "down2": self._neighbor(0, -2),
        }

    @cached_property
    def interior(self) -> np.ndarray:
        """Nodes with all four axis neighbors."""
        nb = self.neighbors
        return (nb["right"] >= 0) & (nb["left"] >= 0) & (nb["up"] >= 0) & (nb["down"] >= 0)

    def inside(self, radius: float) -> np.ndarray:
        return np.abs(self.z) <= radius

    def cell_index(self, x: float) -> int:
        """Column/row index of the cell center nearest to coordinate x."""
        return int(np.clip(np.floor((x + 1.0) / self.h), 0, self.N - 1))


@lru_cache(maxsize=8)
def make_grid(N: int) -> DiscGrid:
    """Cached uniform grid of the unit disc."""
    if N < MIN_N or N % 2:
        raise ValueError(f"N must be even and >= {MIN_N}, got {N}")
    h = 2.0 / N
    centers = -1.0 + (np.arange(N) + 0.5) * h
    X, Y = np.meshgrid(centers, centers)
    keep = X ** 2 + Y ** 2 <= 1.0
    iy, ix = np.nonzero(keep)
    index = np.full((N, N), -1, dtype=np.int64)
    index[iy, ix] = np.arange(iy.size)
    z = centers[ix] + 1j * centers[iy]
    return DiscGrid(N=N, h=h, ix=ix, iy=iy, z=z, index=index)


# ---------------------------------------------------------------------------
# Grid maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridMap:
    """Values of a map D -> C^n (or C^{n x n}) at the grid nodes."""

    grid: DiscGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != self.grid.size:
            raise ValueError(f"expected {self.grid.size} node values, got {vals.shape[0]}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid map has non-finite values")
        object.__setattr__(self, "values", vals.astype(complex))

    @classmethod
    def from_function(cls, grid: DiscGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "GridMap":
        """Sample ``fn(z)`` (complex array in, (M,) or (M, ...) out)."""
        return cls(grid, np.asarray(fn(grid.z)))

    @classmethod
    def from_components(cls, grid: DiscGrid, fns: List[Callable]) -> "GridMap":
        return cls(grid, np.stack([np.broadcast_to(f(grid.z), grid.z.shape) for f in fns], axis=1))

    @property
    def n(self) -> int:
        return int(self.values.shape[1])

    @property
    def real(self) -> np.ndarray:
        """(M, 2n) real representation."""
        return to_real(self.values)

    def component(self, k: int) -> np.ndarray:
        return self.values[:, k]

    def with_values(self, values: np.ndarray) -> "GridMap":
        return GridMap(self.grid, values)

    def sup(self, mask: Optional[np.ndarray] = None) -> float:
        """Sup of the Euclidean norm over (masked) nodes."""
        norms = np.sqrt(np.sum(np.abs(self.values.reshape(self.grid.size, -1)) ** 2, axis=1))
        if mask is not None:
            norms = norms[mask]
        return float(norms.max()) if norms.size else 0.0


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

def _first(values: np.ndarray, plus: np.ndarray, minus: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    both = (plus >= 0) & (minus >= 0)
    only_plus = (plus >= 0) & (minus < 0)
    only_minus = (plus < 0) & (minus >= 0)
    out[both] = (values[plus[both]] - values[minus[both]]) / (2 * h)
    out[only_plus] = (values[plus[only_plus]] - values[only_plus]) / h
    out[only_minus] = (values[only_minus] - values[minus[only_minus]]) / h
    return out


def _second(values, plus, minus, plus2, minus2, h):
    out = np.zeros_like(values)
    both = (plus >= 0) & (minus >= 0)
    fwd = ~both & (plus >= 0) & (plus2 >= 0)
    bwd = ~both & ~fwd & (minus >= 0) & (minus2 >= 0)
    out[both] = values[plus[both]] - 2 * values[both] + values[minus[both]]
    out[fwd] = values[fwd] - 2 * values[plus[fwd]] + values[plus2[fwd]]
    out[bwd] = values[bwd] - 2 * values[minus[bwd]] + values[minus2[bwd]]
    return out / h ** 2


def partials(m: GridMap) -> Tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) at every node: central inside, one-sided on the rim."""
    nb, h = m.grid.neighbors, m.grid.h
    return (_first(m.values, nb["right"], nb["left"], h),
            _first(m.values, nb["up"], nb["down"], h))


def derivatives(m: GridMap) -> Tuple[GridMap, GridMap, GridMap, np.ndarray]:
    """(d/dz, d/dzbar, Laplacian, valid) with valid marking interior nodes."""
    fx, fy = partials(m)
    nb, h = m.grid.neighbors, m.grid.h
    lap = (_second(m.values, nb["right"], nb["left"], nb["right2"], nb["left2"], h)
           + _second(m.values, nb["up"], nb["down"], nb["up2"], nb["down2"], h))
    dz = 0.5 * (fx - 1j * fy)
    dzbar = 0.5 * (fx + 1j * fy)
    return m.with_values(dz), m.with_values(dzbar), m.with_values(lap), m.grid.interior.copy()


def dzbar(m: GridMap) -> np.ndarray:
    fx, fy = partials(m)
    return 0.5 * (fx + 1j * fy)


def grad_norm(fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    """Operator norm of the real Jacobian with columns (fx, fy) per node.

    For a complex scalar this is |f_z| + |f_zbar|.
    """
    fx = fx.reshape(fx.shape[0], -1)
    fy = fy.reshape(fy.shape[0], -1)
    a = np.sum(np.abs(fx) ** 2, axis=1)
    b = np.sum(np.abs(fy) ** 2, axis=1)
    c = np.sum((np.conj(fx) * fy).real, axis=1)
    lam = 0.5 * (a + b) + np.sqrt(0.25 * (a - b) ** 2 + c ** 2)
    return np.sqrt(lam)


# ---------------------------------------------------------------------------
# Jets at the origin
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Jet:
    """k-jet target at 0: value p and derivatives v_1..v_k along the x-axis (R^{2n})."""

    k: int
    p: np.ndarray
    v: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.v) != self.k:
            raise ValueError(f"jet of order {self.k} needs {self.k} vectors")
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "v", tuple(np.asarray(v, dtype=float) for v in self.v))

    def vector(self) -> np.ndarray:
        return np.concatenate([self.p, *self.v])


def _line(m: GridMap, axis: str) -> dict:
    """Values along the x (or y) axis at offsets -3h/2..3h/2, averaged across it."""
    g = m.grid
    c = g.N // 2
    idx = g.index
    out = {}
    for k, col in zip((-3, -1, 1, 3), (c - 2, c - 1, c, c + 1)):
        if axis == "x":
            a, b = idx[c - 1, col], idx[c, col]
        else:
            a, b = idx[col, c - 1], idx[col, c]
        out[k] = 0.5 * (m.values[a] + m.values[b])
    return out


def _stencils(F: dict, h: float):
    value = 0.5 * (F[-1] + F[1])
    first = (F[-3] - 27 * F[-1] + 27 * F[1] - F[3]) / (24 * h)
    second = (F[-3] - F[-1] - F[1] + F[3]) / (2 * h ** 2)
    return value, first, second


def value_at_zero(m: GridMap) -> np.ndarray:
    return _stencils(_line(m, "x"), m.grid.h)[0]


def gradient_at_zero(m: GridMap) -> Tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) at 0 from the staggered stencils."""
    h = m.grid.h
    return _stencils(_line(m, "x"), h)[1], _stencils(_line(m, "y"), h)[1]


def complex_gradient_at_zero(m: GridMap) -> Tuple[np.ndarray, np.ndarray]:
    """(d/dz, d/dzbar) at 0."""
    fx, fy = gradient_at_zero(m)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def second_at_zero(m: GridMap) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(f_xx, f_xy, f_yy) at 0."""
    g, h = m.grid, m.grid.h
    c = g.N // 2
    fxx = _stencils(_line(m, "x"), h)[2]
    fyy = _stencils(_line(m, "y"), h)[2]
    idx = g.index
    fxy = (m.values[idx[c, c]] - m.values[idx[c, c - 1]]
           - m.values[idx[c - 1, c]] + m.values[idx[c - 1, c - 1]]) / h ** 2
    return fxx, fxy, fyy


def jet_at_zero(m: GridMap, k: int) -> Jet:
    """Value and x-derivatives up to order k (k <= 2) at 0, as real vectors."""
    if k not in (0, 1, 2):
        raise ValueError("jet order must be 0, 1 or 2")
    value, first, second = _stencils(_line(m, "x"), m.grid.h)
    vs = [first, second][:k]
    return Jet(k=k, p=to_real(value), v=tuple(to_real(v) for v in vs))


# ---------------------------------------------------------------------------
# Norms and interpolation
# ---------------------------------------------------------------------------

def phi(r: np.ndarray) -> np.ndarray:
    """Modulus of continuity r log(1/r) for r < 1/e, constant 1/e beyond."""
    r = np.asarray(r, dtype=float)
    safe = np.clip(r, 1e-300, None)
    return np.where(r < 1.0 / math.e, safe * np.log(1.0 / safe), 1.0 / math.e)


@lru_cache(maxsize=8)
def pair_offsets(N: int) -> Tuple[Tuple[int, int], ...]:
    """Deterministic integer offsets with lengths between h and 1/2."""
    h = 2.0 / N
    found = []
    for r in np.geomspace(h, 0.5, OFFSET_RADII):
        for theta in OFFSET_ANGLES:
            dx = int(round(r * math.cos(theta) / h))
            dy = int(round(r * math.sin(theta) / h))
            while (dx or dy) and h * math.hypot(dx, dy) > 0.5 + 1e-12:
                dx, dy = int(dx * 0.9), int(dy * 0.9)
            if (dx, dy) != (0, 0) and (dx, dy) not in found:
                found.append((dx, dy))
    return tuple(found)


def c1phi_parts(m: GridMap) -> Tuple[float, float]:
    """(sup|m| + sup|grad m|, phi-Hoelder seminorm of grad m) on sampled pairs."""
    fx, fy = partials(m)
    g = m.grid
    c1 = m.sup() + float(grad_norm(fx, fy).max())
    semi = 0.0
    for dx, dy in pair_offsets(g.N):
        jx, jy = g.ix + dx, g.iy + dy
        ok = (jx >= 0) & (jx < g.N) & (jy >= 0) & (jy < g.N)
        src = np.nonzero(ok)[0]
        dst = g.index[jy[ok], jx[ok]]
        keep = dst >= 0
        src, dst = src[keep], dst[keep]
        if src.size == 0:
            continue
        diff = grad_norm(fx[dst] - fx[src], fy[dst] - fy[src])
        semi = max(semi, float(diff.max() / phi(g.h * math.hypot(dx, dy))))
    return c1, semi


def norm_c1phi(m: GridMap) -> float:
    """Discrete C^{1,phi} norm (a lower estimate of the continuous one)."""
    c1, semi = c1phi_parts(m)
    return c1 + semi


def interp(m: GridMap, z: complex) -> np.ndarray:
    """Bilinear interpolation at |z| <= 1, nearest node next to the rim."""
    if abs(z) > 1.0 + 1e-12:
        raise DomainError(f"interpolation point outside the closed disc: {z}")
    g = m.grid
    fx = (z.real + 1.0) / g.h - 0.5
    fy = (z.imag + 1.0) / g.h - 0.5
    j0, k0 = int(math.floor(fx)), int(math.floor(fy))
    tx, ty = fx - j0, fy - k0
    corners = [(j0, k0), (j0 + 1, k0), (j0, k0 + 1), (j0 + 1, k0 + 1)]
    ids = []
    for j, k in corners:
        if 0 <= j < g.N and 0 <= k < g.N and g.index[k, j] >= 0:
            ids.append(g.index[k, j])
        else:
            ids = None
            break
    if ids is None:
        return m.values[int(np.argmin(np.abs(g.z - z)))].copy()
    w = [(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty]
    return sum(wi * m.values[i] for wi, i in zip(w, ids))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_csv(m: GridMap, path: Path) -> Path:
    """Header '# N=..,n=..' then columns x, y, re_1, im_1, ..."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"# N={m.grid.N},n={m.n}\n")
        writer = csv.writer(f)
        header = ["x", "y"]
        for k in range(1, m.n + 1):
            header += [f"re_{k}", f"im_{k}"]
        writer.writerow(header)
        real = m.real
        for node in range(m.grid.size):
            z = m.grid.z[node]
            writer.writerow([repr(float(z.real)), repr(float(z.imag))]
                            + [repr(float(v)) for v in real[node]])
    return path


def read_csv(path: Path) -> GridMap:
    """Inverse of write_csv; the node order must match make_grid(N)."""
    path = Path(path)
    with open(path) as f:
        head = f.readline().strip()
        if not head.startswith("# N="):
            raise HypothesisError(f"{path}: missing '# N=..,n=..' header")
        meta = dict(part.split("=") for part in head[2:].split(","))
        N, n = int(meta["N"]), int(meta["n"])
        reader = csv.reader(f)
        next(reader)
        rows = np.array([[float(v) for v in row] for row in reader if row])
    grid = make_grid(N)
    if rows.shape != (grid.size, 2 + 2 * n):
        raise HypothesisError(f"{path}: expected {grid.size} rows of {2 + 2 * n} columns")
    if np.abs(rows[:, 0] + 1j * rows[:, 1] - grid.z).max() > 1e-12:
        raise HypothesisError(f"{path}: node coordinates do not match the N={N} grid")
    return GridMap(grid, to_complex(rows[:, 2:]))
