"""Empirical decay rates: dispersive sup bounds, threshold remainders, weighted L2 decay."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import propagator
from .errors import BoundaryWarning, DegenerateInputError, DomainError
from .grid import Grid, KernelMatrix, WaveFunction, panel_edges
from .hankel import spectral_cutoff
from .operator import (
    OperatorParams,
    d_lambda_scaled_density,
    e0_kernel,
    e1_scaled_kernel,
    scaled_density_kernel,
)

BOUNDARY_FRACTION = 0.1
SEARCH_X_MIN = 1e-3


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through ``(log variable, log value)``."""

    exponent: float
    prefactor: float
    r_squared: float
    n_points: int
    variables: np.ndarray = field(repr=False, compare=False)
    values: np.ndarray = field(repr=False, compare=False)

    def __call__(self, variable):
        return self.prefactor * np.asarray(variable, dtype=float) ** self.exponent


def fit_power_law(samples, values=None) -> PowerLawFit:
    """Fit ``value = prefactor * variable**exponent``.

    ``samples`` is a sequence of ``(variable, value)`` pairs, or the array of
    variables when ``values`` is given.  Samples are sorted by variable.
    """
    if values is None:
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise DegenerateInputError("samples must be (variable, value) pairs")
        v, y = arr[:, 0], arr[:, 1]
    else:
        v = np.asarray(samples, dtype=float).ravel()
        y = np.asarray(values, dtype=float).ravel()
        if v.shape != y.shape:
            raise DegenerateInputError("variables and values differ in length")
    if v.size < 5:
        raise DegenerateInputError(f"need at least 5 samples, got {v.size}")
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(y))):
        raise DegenerateInputError("samples must be finite")
    if v.min() <= 0 or y.min() <= 0:
        raise DegenerateInputError("variables and values must be positive")
    order = np.argsort(v, kind="stable")
    v, y = v[order], y[order]
    lx, ly = np.log(v), np.log(y)
    mx, my = lx.mean(), ly.mean()
    dx, dy = lx - mx, ly - my
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateInputError("all variables are equal")
    slope = float(dx @ dy) / sxx
    icept = my - slope * mx
    resid = dy - slope * dx
    syy = float(dy @ dy)
    # log-values constant to rounding: the fit is exact
    flat = syy <= (1e-13 * (1.0 + abs(my))) ** 2 * v.size
    r2 = 1.0 if flat else max(0.0, 1.0 - float(resid @ resid) / syy)
    return PowerLawFit(slope, math.exp(icept), r2, int(v.size), v, y)


@dataclass(frozen=True)
class ScanConfig:
    """Parameters of a rate scan over ``t`` (dispersive) or ``lambda`` (threshold)."""

    alpha: float
    s: float
    variable_min: float
    variable_max: float
    n_samples: int = 25
    x_max: float | None = None
    panel_order: int = 16
    search_points: int = 600

    def __post_init__(self):
        OperatorParams(self.alpha)
        if not (self.variable_min > 0 and self.variable_min < self.variable_max):
            raise DomainError("need 0 < variable_min < variable_max")
        if self.n_samples < 5:
            raise DomainError("n_samples must be >= 5")
        if self.s < 0:
            raise DomainError("s must be >= 0")

    @property
    def params(self) -> OperatorParams:
        return OperatorParams(self.alpha)

    def samples(self) -> np.ndarray:
        return np.geomspace(self.variable_min, self.variable_max, self.n_samples)

    def require_dispersive(self):
        check_dispersive_s(self.params, self.s)

    def require_threshold(self):
        check_threshold_s(self.params, self.s)


def check_dispersive_s(params: OperatorParams, s):
    top = params.nu + 0.5
    if not (0.0 <= s <= top * (1 + 1e-14)):
        raise DomainError(f"s must lie in [0, nu+1/2] = [0, {top:.6g}], got {s:g}")


def check_threshold_s(params: OperatorParams, s):
    low = params.nu + 1.0
    if not s > low:
        raise DomainError(f"s must exceed nu+1 = {low:.6g}, got {s:g}")


# ---------------------------------------------------------------------------
# dispersive bound
# ---------------------------------------------------------------------------

def _weighted_kernel_modulus(params, s, t, x, y):
    w = (1.0 + x) ** (-s)
    wy = (1.0 + y) ** (-s)
    return w[:, None] * propagator.kernel_modulus(params, t, x[:, None], y[None, :]) * wy[None, :]


def _grid_sup(params, s, t, x, block=1_000_000):
    best = 0.0
    edge = 0.0
    step = max(1, block // x.size)
    for i in range(0, x.size, step):
        m = _weighted_kernel_modulus(params, s, t, x[i:i + step], x)
        best = max(best, float(m.max()))
        edge = max(edge, float(m[:, 0].max()), float(m[:, -1].max()))
        if i == 0:
            edge = max(edge, float(m[0].max()))
        if i + step >= x.size:
            edge = max(edge, float(m[-1].max()))
    return best, edge


def dispersive_search_grid(x_max, n_points=600, x_min=SEARCH_X_MIN) -> Grid:
    return Grid.geometric(x_min, x_max, n_points)


def dispersive_sup(params: OperatorParams, s, t, search_grid: Grid | None = None, *,
                   n_points=600, growth=4.0, max_growths=12, check_boundary=True,
                   return_grid=False):
    """``max |(1+x)^-s K_t(x, y) (1+y)^-s|`` over pairs of search-grid points.

    Without ``search_grid`` a geometric grid on ``[1e-3, X]`` is used and
    ``X`` (starting at ``10 max(1, sqrt t)``) grows until the largest value
    on the grid boundary is below 10% of the maximum.  For ``s = 0`` the
    weighted kernel does not decay, so the boundary test is skipped.
    Emits :class:`BoundaryWarning` when the test still fails.
    """
    check_dispersive_s(params, s)
    t = float(t)
    if not t > 0:
        raise DomainError("t must be > 0")
    test = check_boundary and s > 0
    if search_grid is not None:
        best, edge = _grid_sup(params, s, t, search_grid.points)
        grid = search_grid
        ok = not test or edge < BOUNDARY_FRACTION * best
    else:
        x_max = 10.0 * max(1.0, math.sqrt(t))
        for _ in range(max_growths + 1):
            grid = dispersive_search_grid(x_max, n_points)
            best, edge = _grid_sup(params, s, t, grid.points)
            ok = not test or edge < BOUNDARY_FRACTION * best
            if ok:
                break
            x_max *= growth
    if not ok:
        warnings.warn(f"sup at t={t:g} is boundary dominated: edge/max = {edge / best:.3g}",
                      BoundaryWarning, stacklevel=2)
    return (best, grid) if return_grid else best


def dispersive_scan(config: ScanConfig, t_values=None) -> PowerLawFit:
    """Fit the decay exponent of :func:`dispersive_sup` over ``t``."""
    config.require_dispersive()
    p = config.params
    ts = np.sort(np.asarray(t_values, dtype=float)) if t_values is not None else config.samples()
    if config.x_max is not None:
        grid = dispersive_search_grid(config.x_max, config.search_points)
        sups = [dispersive_sup(p, config.s, t, grid) for t in ts]
    else:
        sups = [dispersive_sup(p, config.s, t, n_points=config.search_points) for t in ts]
    return fit_power_law(ts, np.asarray(sups))


# ---------------------------------------------------------------------------
# Hilbert-Schmidt norms near the threshold
# ---------------------------------------------------------------------------

def weighted_hs_norm(kernel: KernelMatrix, s) -> float:
    """``sqrt(sum |K_ij|^2 rho_i^-2s rho_j^-2s w_i w_j)`` with ``rho = 1 + x``.

    A weight already recorded on ``kernel`` counts toward ``s``.
    """
    extra = float(s) - kernel.weight_exponent_s
    if extra < -1e-15:
        raise DomainError("kernel already carries a larger weight than requested")
    g = kernel.grid
    r = g.quad_weights * (1.0 + g.points) ** (-2.0 * max(extra, 0.0))
    with np.errstate(over="raise", invalid="raise"):
        try:
            a = np.abs(kernel.entries) ** 2
            total = float(r @ a @ r)
        except FloatingPointError as exc:
            raise OverflowError("weighted Hilbert-Schmidt norm overflowed") from exc
    if not math.isfinite(total):
        raise OverflowError("weighted Hilbert-Schmidt norm is not finite")
    return math.sqrt(total)


def threshold_grid(lam, x_far=1e3, order=16, near_width=8.0, zone=200.0) -> Grid:
    """Quadrature grid for kernels at spectral parameter ``lam``.

    Geometric panels resolve the weights near the origin, panels no wider
    than ``near_width / sqrt(lam)`` follow the oscillations out to
    ``zone / sqrt(lam)``, and geometric panels continue to ``x_far / sqrt(lam)``.
    """
    k = math.sqrt(lam)
    osc_start, osc_end = 1.0 / k, zone / k

    def cap(x):
        return near_width / k if x < osc_end else math.inf

    first = min(0.05, 0.5 / k)
    edges = panel_edges(x_far / k, cap, first_width=first, growth=0.5, origin_levels=8,
                        breakpoints=(osc_start, osc_end))
    return Grid.from_edges(edges, order)


@dataclass(frozen=True)
class ThresholdSample:
    lam: float
    scaled_norm: float      # ||rho^-s lam^-nu E(lam) rho^-s||_HS
    remainder_norm: float   # ||rho^-s (lam^-nu E(lam) - E0) rho^-s||_HS
    e0_norm: float          # ||rho^-s E0 rho^-s||_HS

    @property
    def relative_gap(self) -> float:
        return abs(self.scaled_norm - self.e0_norm) / self.e0_norm


def threshold_norms(params: OperatorParams, s, lam, grid: Grid | None = None) -> ThresholdSample:
    """Weighted HS norms of the scaled density, its remainder and ``E0`` at ``lam``."""
    check_threshold_s(params, s)
    grid = grid or threshold_grid(lam)
    x = grid.points
    xi, yj = x[:, None], x[None, :]
    e1 = KernelMatrix(grid, e1_scaled_kernel(params, lam, xi, yj), symmetric=True)
    e0 = KernelMatrix(grid, e0_kernel(params, xi, yj), symmetric=True)
    full = KernelMatrix(grid, scaled_density_kernel(params, lam, xi, yj), symmetric=True)
    return ThresholdSample(float(lam), weighted_hs_norm(full, s), weighted_hs_norm(e1, s),
                           weighted_hs_norm(e0, s))


def _check_lambdas(lams):
    lams = np.sort(np.asarray(lams, dtype=float))
    if lams.size < 5 or lams.min() <= 0:
        raise DomainError("need at least 5 positive lambda values")
    if lams.max() >= 1.0 or lams.max() / lams.min() < 1e3 * (1 - 1e-12):
        raise DomainError("lambda values must lie below 1 and span at least 3 decades")
    return lams


def threshold_scan(config: ScanConfig, lambdas=None) -> PowerLawFit:
    """Power-law fit of ``||weighted (lam^-nu E(lam) - E0)||_HS`` over ``lam``."""
    config.require_threshold()
    lams = _check_lambdas(config.samples() if lambdas is None else lambdas)
    p = config.params
    vals = [threshold_norms(p, config.s, lam, _scan_grid(config, lam)).remainder_norm
            for lam in lams]
    return fit_power_law(lams, np.asarray(vals))


def _scan_grid(config: ScanConfig, lam):
    if config.x_max is None:
        return threshold_grid(lam, order=config.panel_order)
    return threshold_grid(lam, x_far=config.x_max * math.sqrt(lam), order=config.panel_order)


def derivative_norm(params: OperatorParams, s, lam, grid: Grid | None = None) -> float:
    """``||rho^-s d/dlam (lam^-nu E(lam)) rho^-s||_HS``."""
    check_threshold_s(params, s)
    grid = grid or threshold_grid(lam)
    x = grid.points
    k = KernelMatrix(grid, d_lambda_scaled_density(params, lam, x[:, None], x[None, :]),
                     symmetric=True)
    return weighted_hs_norm(k, s)


def derivative_norm_scan(config: ScanConfig, lambdas=None) -> PowerLawFit:
    """Power-law fit of the weighted HS norm of the lambda-derivative kernel."""
    config.require_threshold()
    lams = _check_lambdas(config.samples() if lambdas is None else lambdas)
    p = config.params
    vals = [derivative_norm(p, config.s, lam, _scan_grid(config, lam)) for lam in lams]
    return fit_power_law(lams, np.asarray(vals))


def e0_weighted_hs_exact(params: OperatorParams, s) -> float:
    """Closed form of ``||rho^-s E0 rho^-s||_HS`` for ``s > nu + 1``.

    ``E0`` is rank one, so the norm is ``c int x^(2nu+1) (1+x)^(-2s) dx``,
    a Beta integral ``B(2nu+2, 2s-2nu-2)``.
    """
    check_threshold_s(params, s)
    nu = params.nu
    a, b = 2.0 * nu + 2.0, 2.0 * s - 2.0 * nu - 2.0
    beta = math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    return float(e0_kernel(params, 1.0, 1.0)) * beta


# ---------------------------------------------------------------------------
# weighted L2 decay
# ---------------------------------------------------------------------------

PROBE_CENTERS = (3.0, 5.0, 7.0, 9.0, 11.0)
PROBE_WIDTHS = (1.0, 1.5, 2.0)


def gaussian_probes(beta, centers=PROBE_CENTERS, widths=PROBE_WIDTHS, panel_width=1.0,
                    order=16):
    """Bumps ``exp(-((x-c)/w)^2)`` on a shared grid, normalized by ``||(1+x)^beta f|| = 1``."""
    reach = max(centers) + 6.0 * max(widths)
    grid = Grid.gauss_legendre(reach, panel_width, order)
    out = []
    for c in centers:
        for w in widths:
            f = WaveFunction.from_function(grid, lambda x, c=c, w=w: np.exp(-((x - c) / w) ** 2))
            out.append(f * (1.0 / f.weighted_norm(beta)))
    return out


def _weighted_output_norms(params, t, grid_in, values, beta, k_max, tail_tol, block):
    """``||(1+x)^-beta exp(-itH) f||`` for each column of ``values``.

    The output is built outward in doubling chunks until a chunk adds less
    than ``tail_tol`` of the accumulated squared norm or the ballistic
    radius is reached.  Panel widths follow the local wavenumber bound
    ``min(k_max, (x + y_max) / 2t)`` of the evolved state.
    """
    y = grid_in.points
    y_max = float(y[-1])
    wv = grid_in.quad_weights[:, None] * values
    reach = y_max + 2.0 * k_max * t + 10.0 * math.sqrt(t)
    total = np.zeros(values.shape[1])
    a, b = 0.0, min(reach, y_max + 10.0)
    while True:
        freq = min(k_max, (b + y_max) / (2.0 * t))
        width = min(1.0, 0.5 * math.pi / freq)
        n_pan = max(1, int(math.ceil((b - a) / width)))
        edges = np.linspace(a, b, n_pan + 1)
        if a == 0.0:
            edges = np.concatenate(([0.0], edges[1] * 0.25 ** np.arange(6, 0, -1), edges[1:]))
        chunk = Grid.from_edges(edges, 16)
        x = chunk.points
        r = chunk.quad_weights * (1.0 + x) ** (-2.0 * beta)
        part = np.zeros_like(total)
        step = max(1, block // y.size)
        for i in range(0, x.size, step):
            psi = propagator.kernel(params, t, x[i:i + step, None], y[None, :]) @ wv
            part += r[i:i + step] @ (np.abs(psi) ** 2)
        total += part
        if b >= reach or np.all(part <= tail_tol * total):
            break
        a, b = b, min(reach, 2.0 * b)
    return np.sqrt(total)


def l2_weighted_decay(params: OperatorParams, s, beta, t_list, probes=None, *,
                      tail_tol=1e-6, spectral_tol=1e-6, block=2_000_000,
                      return_values=False):
    """Decay exponent of ``||(1+x)^-beta exp(-itH) (1+x)^-beta||`` over ``t``.

    The operator norm is bounded below by the largest weighted output norm
    over ``probes`` (default :func:`gaussian_probes`), each normalized by
    ``||(1+x)^beta f|| = 1``.  Requires ``0 <= s <= nu + 1/2`` and
    ``beta > s + 1/2``.
    """
    check_dispersive_s(params, s)
    if not beta > s + 0.5:
        raise DomainError(f"beta must exceed s + 1/2 = {s + 0.5:g}, got {beta:g}")
    ts = np.sort(np.asarray(t_list, dtype=float))
    if ts.size == 0 or ts.min() <= 0:
        raise DomainError("t values must be positive")
    probes = gaussian_probes(beta) if probes is None else list(probes)
    grid_in = probes[0].grid
    if any(p.grid is not grid_in and not np.array_equal(p.grid.points, grid_in.points)
           for p in probes):
        raise DomainError("probes must share one grid")
    vals = np.stack([p.values for p in probes], axis=1)
    k_max = max(math.sqrt(spectral_cutoff(params, p, spectral_tol)) for p in probes)
    norms = np.array([
        _weighted_output_norms(params, t, grid_in, vals, beta, k_max, tail_tol, block).max()
        for t in ts
    ])
    fit = fit_power_law(ts, norms) if ts.size >= 5 else None
    return (fit, norms) if return_values else fit
