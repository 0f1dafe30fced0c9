"""Hankel transform pair diagonalizing the half-line operator.

Forward:  ``F(p) = int psi(x) sqrt(x) J_nu(x sqrt(p)) dx``
Inverse:  ``psi(x) = (1/2) int F(p) sqrt(x) J_nu(x sqrt(p)) dp``

The pair is mutually inverse, and ``int |F|^2 dp / 2 = int |psi|^2 dx``,
so the spectral norm carries the same factor one half as the inverse.
Quadrature in ``p`` runs over panels uniform in ``k = sqrt(p)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DomainError, ResolutionError, TruncationWarning
from .grid import Grid, WaveFunction, _legendre
from .operator import OperatorParams

TAIL_TOL = 1e-10
PHASE_GUARD = math.pi / 4


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Quadrature nodes in the spectral variable ``p`` (``dp`` measure)."""

    p_points: np.ndarray
    p_weights: np.ndarray
    p_max: float
    max_panel_dp: float = math.inf

    def __post_init__(self):
        p = np.ascontiguousarray(self.p_points, dtype=float)
        w = np.ascontiguousarray(self.p_weights, dtype=float)
        object.__setattr__(self, "p_points", p)
        object.__setattr__(self, "p_weights", w)
        if p.ndim != 1 or p.shape != w.shape or p.size == 0:
            raise ValueError("p_points and p_weights must be matching non-empty 1-d arrays")
        if p[0] <= 0 or np.any(np.diff(p) <= 0):
            raise ValueError("p_points must be positive and strictly increasing")
        if np.any(w <= 0):
            raise ValueError("p_weights must be positive")
        if p[-1] > self.p_max:
            raise ValueError("last p point exceeds p_max")

    def __len__(self):
        return self.p_points.size

    @classmethod
    def build(cls, p_max, x_max, t_max=0.0, order=8):
        """Panels uniform-ish in ``k = sqrt(p)`` up to ``sqrt(p_max)``.

        Each panel satisfies ``x_max * dk <= pi/2`` so that ``J_nu(x k)``
        changes phase by at most a quarter turn, and ``t_max * dp <= pi/4``
        so that ``exp(-i t p)`` is resolved for ``|t| <= t_max``.
        """
        if p_max <= 0 or x_max <= 0:
            raise DomainError("p_max and x_max must be positive")
        k_max = math.sqrt(p_max)
        dk_space = 0.5 * math.pi / x_max
        edges = [0.0]
        k = 0.0
        while k < k_max:
            dk = dk_space
            if t_max > 0:
                # dp = (2k + dk) dk <= guard / t_max
                g = PHASE_GUARD / t_max
                dk = min(dk, -k + math.sqrt(k * k + g))
            k = min(k + dk, k_max)
            edges.append(k)
        ke = np.asarray(edges)
        tn, wn = _legendre(order)
        a, b = ke[:-1, None], ke[1:, None]
        kk = (0.5 * (a + b) + 0.5 * (b - a) * tn).ravel()
        wk = (0.5 * (b - a) * wn).ravel()
        dp = float(np.max(ke[1:] ** 2 - ke[:-1] ** 2))
        return cls(kk * kk, 2.0 * kk * wk, p_max, dp)

    @classmethod
    def for_state(cls, params: OperatorParams, psi: WaveFunction, t_max=0.0, x_max=None,
                  tol=TAIL_TOL, order=8):
        """Spectral grid sized for ``psi`` and evolution times up to ``t_max``."""
        p_max = spectral_cutoff(params, psi, tol)
        return cls.build(p_max, x_max or psi.grid.x_max, t_max, order)

    def integrate(self, values):
        return np.asarray(values) @ self.p_weights

    def phase_resolved(self, t) -> bool:
        return abs(t) * self.max_panel_dp <= PHASE_GUARD * (1 + 1e-12)


def _check_tail(psi: WaveFunction, what):
    tail = psi.tail_mass()
    if tail > TAIL_TOL:
        warnings.warn(f"{what}: relative tail mass {tail:.2e} at x_max exceeds {TAIL_TOL:g}",
                      TruncationWarning, stacklevel=3)
    return tail


def _bessel_block(nu, a, b):
    """``sqrt(a) J_nu(a sqrt(b))`` on the outer product of ``a`` and ``b``."""
    return np.sqrt(a)[:, None] * specfun.bessel_j(nu, a[:, None] * np.sqrt(b)[None, :])


def _block_rows(n_rows, n_cols, budget=4_000_000):
    step = max(1, budget // max(n_cols, 1))
    return range(0, n_rows, step), step


def _transform(nu, rows, cols, weighted_values):
    """``out[i] = sum_j sqrt(rows_i) J_nu(rows_i sqrt(cols_j)) v_j`` in row blocks."""
    out = np.empty(rows.size, dtype=complex)
    starts, step = _block_rows(rows.size, cols.size)
    for i in starts:
        blk = _bessel_block(nu, rows[i:i + step], cols)
        out[i:i + step] = blk @ weighted_values
    return out


def _transform_sqrt(nu, rows_p, cols_x, weighted_values):
    """``out[i] = sum_j sqrt(x_j) J_nu(x_j sqrt(p_i)) v_j``."""
    out = np.empty(rows_p.size, dtype=complex)
    starts, step = _block_rows(rows_p.size, cols_x.size)
    kx = np.sqrt(rows_p)
    rx = np.sqrt(cols_x)
    for i in starts:
        blk = rx[None, :] * specfun.bessel_j(nu, kx[i:i + step, None] * cols_x[None, :])
        out[i:i + step] = blk @ weighted_values
    return out


def forward(params: OperatorParams, psi: WaveFunction, sgrid: SpectralGrid) -> np.ndarray:
    """Spectral samples ``F(p)`` on ``sgrid`` by quadrature over ``psi.grid``."""
    _check_tail(psi, "forward transform")
    g = psi.grid
    return _transform_sqrt(params.nu, sgrid.p_points, g.points, g.quad_weights * psi.values)


def inverse(params: OperatorParams, f, grid: Grid, sgrid: SpectralGrid) -> WaveFunction:
    """``(1/2) int f(p) sqrt(x) J_nu(x sqrt(p)) dp`` sampled on ``grid``."""
    f = np.asarray(f, dtype=complex)
    if f.shape != sgrid.p_points.shape:
        raise ValueError("spectral samples must match the spectral grid")
    if f.size and np.any(f):
        peak = np.max(np.abs(f))
        edge = np.max(np.abs(f[-max(1, f.size // 50):]))
        if edge > TAIL_TOL * peak:
            warnings.warn(f"inverse transform: spectral samples at p_max are {edge / peak:.2e} "
                          "of the peak", TruncationWarning, stacklevel=2)
    vals = 0.5 * _transform(params.nu, grid.points, sgrid.p_points, sgrid.p_weights * f)
    return WaveFunction(grid, vals)


def spectral_norm(f, sgrid: SpectralGrid) -> float:
    """``sqrt((1/2) int |f(p)|^2 dp)``, equal to the L2 norm of the preimage."""
    return math.sqrt(0.5 * float(sgrid.integrate(np.abs(np.asarray(f)) ** 2)))


def spectral_cutoff(params: OperatorParams, psi: WaveFunction, tol=TAIL_TOL, k_start=16.0):
    """Smallest ``p_max`` beyond which ``|F(p)|`` stays below ``tol`` of its peak.

    ``|F|`` is scanned on a grid in ``k = sqrt(p)`` whose range doubles
    until the tail criterion is met.  A 10% margin is added in ``k``.
    """
    g = psi.grid
    support = g.points[np.abs(psi.values) > 0]
    x_span = float(support[-1]) if support.size else g.x_max
    dk = 0.25 * math.pi / max(x_span, 1e-12)
    gaps = np.diff(np.concatenate(([0.0], g.points)))
    k_limit = math.pi / float(np.max(gaps))
    wv = g.quad_weights * psi.values
    k_top = min(k_start, k_limit)
    while True:
        k = np.arange(dk, k_top + dk, dk)
        amp = np.abs(_transform_sqrt(params.nu, k * k, g.points, wv))
        peak = amp.max() if amp.size else 0.0
        if peak == 0.0:
            return k_top ** 2
        above = np.nonzero(amp > tol * peak)[0]
        last = int(above[-1])
        if last < amp.size - 1 - max(2, amp.size // 20) or k_top >= k_limit:
            k_cut = min(1.1 * k[min(last + 1, amp.size - 1)], k_limit)
            return float(k_cut ** 2)
        k_top = min(2.0 * k_top, k_limit)


def evolve_diagonalized(params: OperatorParams, psi: WaveFunction, t, sgrid: SpectralGrid,
                        out_grid: Grid | None = None) -> WaveFunction:
    """``U^{-1} exp(-i t p) U psi`` on ``out_grid`` (default: the input grid)."""
    t = float(t)
    if not sgrid.phase_resolved(t):
        raise ResolutionError(
            f"spectral grid cannot resolve exp(-itp) at t={t:g}: "
            f"|t| * max panel dp = {abs(t) * sgrid.max_panel_dp:.3g} > pi/4")
    f = forward(params, psi, sgrid)
    return inverse(params, np.exp(-1j * t * sgrid.p_points) * f, out_grid or psi.grid, sgrid)
