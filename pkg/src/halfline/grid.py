"""Discretizations of the half-line: quadrature grids, sampled states and kernels."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def panel_edges(x_max, max_width, *, first_width=None, growth=0.5, origin_levels=6,
                origin_ratio=0.25, breakpoints=()):
    """Panel endpoints on ``[0, x_max]``.

    Panel widths grow like ``growth * x`` and are capped at ``max_width``,
    which may be a number or a callable of the panel's left end.  The first
    panel ``[0, first_width]`` is refined geometrically toward the origin by
    ``origin_levels`` extra panels.  ``breakpoints`` are forced edges.
    """
    if x_max <= 0:
        raise ValueError("x_max must be positive")
    cap = max_width if callable(max_width) else (lambda x, w=float(max_width): w)
    if first_width is None:
        first_width = min(cap(0.0), x_max)
    edges = [0.0]
    r = first_width
    inner = [first_width * origin_ratio ** k for k in range(origin_levels, 0, -1)]
    edges.extend(inner)
    edges.append(min(r, x_max))
    forced = sorted(b for b in breakpoints if r < b < x_max)
    x = edges[-1]
    while x < x_max:
        w = min(cap(x), max(growth * x, first_width))
        nxt = x + w
        while forced and forced[0] <= x:
            forced.pop(0)
        if forced and nxt > forced[0]:
            nxt = forced.pop(0)
        if nxt >= x_max * (1 - 1e-12):
            nxt = x_max
        edges.append(nxt)
        x = nxt
    return np.asarray(edges)


def gauss_legendre_nodes(edges, order=16):
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    t, w = _legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (0.5 * (a + b) + half * t).ravel(), (half * w).ravel()


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing sample points on ``(0, x_max]`` with quadrature weights."""

    points: np.ndarray
    quad_weights: np.ndarray
    x_max: float

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        wts = np.ascontiguousarray(self.quad_weights, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "quad_weights", wts)
        object.__setattr__(self, "x_max", float(self.x_max))
        if pts.ndim != 1 or pts.shape != wts.shape or pts.size == 0:
            raise ValueError("points and weights must be matching non-empty 1-d arrays")
        if pts[0] <= 0.0:
            raise ValueError("grid must exclude the Dirichlet endpoint x = 0")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("grid points must be strictly increasing")
        if pts[-1] > self.x_max:
            raise ValueError("last grid point exceeds x_max")
        if np.any(wts <= 0.0):
            raise ValueError("quadrature weights must be positive")

    def __len__(self):
        return self.points.size

    @classmethod
    def from_edges(cls, edges, order=16):
        x, w = gauss_legendre_nodes(edges, order)
        return cls(x, w, float(edges[-1]))

    @classmethod
    def gauss_legendre(cls, x_max, panel_width, order=16, **kw):
        """Composite Gauss-Legendre grid with panels no wider than ``panel_width``."""
        return cls.from_edges(panel_edges(x_max, panel_width, **kw), order)

    @classmethod
    def for_wavenumber(cls, x_max, k_max, order=16, phase_per_panel=np.pi, **kw):
        """Grid resolving oscillations ``exp(i k x)`` with ``|k| <= k_max``."""
        return cls.gauss_legendre(x_max, phase_per_panel / k_max, order, **kw)

    @classmethod
    def uniform(cls, length, n):
        """Interior nodes ``(j+1) h`` of ``[0, length]``, ``h = length/(n+1)``."""
        h = length / (n + 1)
        x = h * np.arange(1, n + 1)
        return cls(x, np.full(n, h), length)

    @classmethod
    def geometric(cls, x_min, x_max, n):
        """Log-spaced points with trapezoid weights in ``log x``."""
        x = np.geomspace(x_min, x_max, n)
        dl = np.log(x_max / x_min) / (n - 1)
        w = x * dl
        w[[0, -1]] *= 0.5
        return cls(x, w, x_max)

    def integrate(self, values, axis=-1):
        return np.tensordot(values, self.quad_weights, axes=([axis], [0]))

    def refined(self, factor=2):
        """Same range with ``factor`` times as many points (geometric/uniform-agnostic)."""
        pts = self.points
        lo = np.concatenate(([0.0], pts[:-1]))
        new = np.linspace(lo, pts, factor + 1)[1:].T.ravel()
        w = np.repeat(self.quad_weights / factor, factor)
        return Grid(new, w, self.x_max)


@dataclass(eq=False)
class WaveFunction:
    """Complex samples of a state on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.points.shape:
            raise ValueError("values must have one entry per grid point")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("wave function samples must be finite")

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.points))

    def norm(self) -> float:
        return float(np.sqrt(self.grid.integrate(np.abs(self.values) ** 2)))

    def weighted_norm(self, s) -> float:
        """``|| (1+x)^s psi ||``."""
        rho = 1.0 + self.grid.points
        return float(np.sqrt(self.grid.integrate(rho ** (2 * s) * np.abs(self.values) ** 2)))

    def tail_mass(self, fraction=0.05) -> float:
        """Relative L2 mass on the last ``fraction`` of ``[0, x_max]``."""
        mask = self.grid.points >= (1.0 - fraction) * self.grid.x_max
        total = self.grid.integrate(np.abs(self.values) ** 2)
        if total == 0:
            return 0.0
        edge = np.sum(self.grid.quad_weights[mask] * np.abs(self.values[mask]) ** 2)
        return float(np.sqrt(edge / total))

    def distance(self, other: "WaveFunction") -> float:
        if other.grid is not self.grid and not np.array_equal(other.grid.points, self.grid.points):
            raise ValueError("wave functions live on different grids")
        return float(np.sqrt(self.grid.integrate(np.abs(self.values - other.values) ** 2)))

    def __add__(self, other):
        return WaveFunction(self.grid, self.values + other.values)

    def __mul__(self, c):
        return WaveFunction(self.grid, c * self.values)

    __rmul__ = __mul__


@dataclass(eq=False)
class KernelMatrix:
    """Two-point kernel ``K(x_i, y_j)`` sampled on ``grid x grid``.

    ``weight_exponent_s`` records a weight ``(1+x)^-s`` already applied on
    both sides.  With ``symmetric=True`` the entries are checked for symmetry
    to 1e-12 relative to their largest magnitude.
    """

    grid: Grid
    entries: np.ndarray
    weight_exponent_s: float = 0.0
    symmetric: bool = field(default=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries)
        n = len(self.grid)
        if self.entries.shape != (n, n):
            raise ValueError(f"kernel entries must be {n}x{n}")
        if self.weight_exponent_s < 0:
            raise ValueError("weight exponent must be >= 0")
        if self.symmetric:
            scale = np.max(np.abs(self.entries)) if self.entries.size else 0.0
            if scale and np.max(np.abs(self.entries - self.entries.T)) > 1e-12 * scale:
                raise ValueError("kernel declared symmetric but entries are not")

    @classmethod
    def from_kernel(cls, grid, kernel, symmetric=True):
        """Sample ``kernel(x, y)`` (a broadcasting callable) on ``grid x grid``."""
        x = grid.points
        return cls(grid, kernel(x[:, None], x[None, :]), symmetric=symmetric)

    def weighted(self, s) -> "KernelMatrix":
        """Apply ``(1+x)^-s K (1+y)^-s`` on top of any weight already present."""
        rho = (1.0 + self.grid.points) ** (-s)
        return KernelMatrix(self.grid, rho[:, None] * self.entries * rho[None, :],
                            self.weight_exponent_s + s, self.symmetric)

    def apply(self, values):
        """Quadrature action ``sum_j K(x_i, y_j) w_j f(y_j)``."""
        return self.entries @ (self.grid.quad_weights * values)
