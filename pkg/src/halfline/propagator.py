"""Schrodinger propagator ``exp(-itH)`` of the half-line inverse-square operator."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DomainError, NumericalWarning, TruncationWarning
from .grid import Grid, WaveFunction
from .hankel import spectral_cutoff
from .operator import OperatorParams

INPUT_TAIL_TOL = 1e-10
OUTPUT_TAIL_TOL = 1e-6


def _check_t(t):
    t = float(t)
    if t == 0.0 or not math.isfinite(t):
        raise DomainError("t must be finite and nonzero")
    return t


def _positive(name, v):
    a = np.asarray(v, dtype=float)
    if a.size and (not np.all(np.isfinite(a)) or a.min() <= 0.0):
        raise DomainError(f"{name} must be finite and > 0")
    return a


def kernel(params: OperatorParams, t, x, y):
    """Integral kernel of ``exp(-itH)``.

    ``(1/(2it)) sqrt(xy) J_nu(xy/2t) exp(i(x^2+y^2)/4t) exp(-i nu pi/2)`` for
    ``t > 0``; negative times use ``K(-t) = conj K(t)`` (the operator is real).
    """
    t = _check_t(t)
    x = _positive("x", x)
    y = _positive("y", y)
    tau = abs(t)
    nu = params.nu
    amp = np.sqrt(x * y) * specfun.bessel_j(nu, x * y / (2.0 * tau)) / (2.0 * tau)
    # 1/(2i) contributes -pi/2 to the phase
    phase = (x * x + y * y) / (4.0 * tau) - 0.5 * math.pi * (nu + 1.0)
    out = amp * np.exp(1j * phase)
    if t < 0:
        out = np.conj(out)
    return out.item() if np.ndim(out) == 0 else out


def kernel_modulus(params: OperatorParams, t, x, y):
    """``|K| = sqrt(xy) |J_nu(xy/2|t|)| / (2|t|)``."""
    t = _check_t(t)
    x = _positive("x", x)
    y = _positive("y", y)
    tau = abs(t)
    out = np.sqrt(x * y) * np.abs(specfun.bessel_j(params.nu, x * y / (2.0 * tau))) / (2.0 * tau)
    return out.item() if np.ndim(out) == 0 else out


def free_dirichlet_kernel(t, x, y):
    """Method-of-images kernel of ``exp(it d^2/dx^2)`` with a Dirichlet wall at 0."""
    t = _check_t(t)
    x = _positive("x", x)
    y = _positive("y", y)
    pref = np.exp(-1j * math.copysign(math.pi / 4, t)) / math.sqrt(4.0 * math.pi * abs(t))
    out = pref * (np.exp(1j * (x - y) ** 2 / (4.0 * t)) - np.exp(1j * (x + y) ** 2 / (4.0 * t)))
    return out.item() if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PropagatorSample:
    t: float
    x: float
    y: float
    value: complex

    @classmethod
    def evaluate(cls, params: OperatorParams, t, x, y) -> "PropagatorSample":
        return cls(float(t), float(x), float(y), complex(kernel(params, t, x, y)))

    def check_bound(self, params: OperatorParams, rtol=1e-12) -> bool:
        bound = kernel_modulus(params, self.t, self.x, self.y)
        return abs(self.value) <= bound * (1.0 + rtol) + 1e-300


def support_radius(psi: WaveFunction, tol=INPUT_TAIL_TOL) -> float:
    """Largest grid point where ``|psi|`` exceeds ``tol`` of its peak."""
    a = np.abs(psi.values)
    if not a.any():
        return float(psi.grid.points[0])
    return float(psi.grid.points[np.nonzero(a > tol * a.max())[0][-1]])


def ballistic_grid(params: OperatorParams, psi0: WaveFunction, t, order=16) -> Grid:
    """Output grid wide enough to hold ``exp(-itH) psi0``.

    The radius is ``R + 2 k |t| + 10 sqrt|t|`` with ``R`` the support radius
    of ``psi0`` and ``k`` its spectral cutoff; panels resolve wavenumber ``k``.
    """
    t = _check_t(t)
    k = math.sqrt(spectral_cutoff(params, psi0))
    radius = support_radius(psi0) + 2.0 * k * abs(t) + 10.0 * math.sqrt(abs(t))
    return Grid.for_wavenumber(radius, max(k, 1.0), order=order)


def evolve(params: OperatorParams, psi0: WaveFunction, t, out_grid: Grid | None = None,
           block=2_000_000) -> WaveFunction:
    """``psi_t(x) = int K(t, x, y) psi0(y) dy`` by quadrature on ``psi0.grid``.

    Without ``out_grid`` the output grid follows :func:`ballistic_grid`.
    Emits :class:`TruncationWarning` when ``psi0`` is not contained in its
    grid or when the result keeps more than ``1e-6`` of its norm at the edge
    of the output grid.
    """
    t = _check_t(t)
    g = psi0.grid
    tail_in = psi0.tail_mass()
    if tail_in > INPUT_TAIL_TOL:
        warnings.warn(f"initial state has relative tail mass {tail_in:.2e} at x_max",
                      TruncationWarning, stacklevel=2)
    if out_grid is None:
        out_grid = ballistic_grid(params, psi0, t)
    y = g.points
    wv = g.quad_weights * psi0.values
    keep = np.abs(wv) > 0
    y, wv = y[keep], wv[keep]
    if y.size > 1:
        omega = (out_grid.x_max + y[-1]) / (2.0 * abs(t))
        if float(np.max(np.diff(y))) * omega > 1.0:
            warnings.warn("input grid under-resolves the kernel oscillation; refine psi0.grid",
                          NumericalWarning, stacklevel=2)
    x = out_grid.points
    out = np.empty(x.size, dtype=complex)
    step = max(1, block // max(y.size, 1))
    for i in range(0, x.size, step):
        out[i:i + step] = kernel(params, t, x[i:i + step, None], y[None, :]) @ wv
    psi_t = WaveFunction(out_grid, out)
    tail_out = psi_t.tail_mass()
    if tail_out > OUTPUT_TAIL_TOL:
        warnings.warn(f"evolved state has relative tail mass {tail_out:.2e} at the output edge",
                      TruncationWarning, stacklevel=2)
    return psi_t
