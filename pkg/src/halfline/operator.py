"""Closed-form kernels of the half-line operator ``-d^2/dx^2 + alpha/x^2``.

The Dirichlet condition at the origin selects the regular solution
``sqrt(x) J_nu(sqrt(lambda) x)``, ``nu = sqrt(1/4 + alpha)``.  Every kernel
here broadcasts over its position and spectral arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DomainError
from .grid import Grid, KernelMatrix, WaveFunction

__all__ = [
    "OperatorParams", "Grid", "WaveFunction", "KernelMatrix",
    "nu_from_alpha", "weight", "eigenfunctions", "resolvent_kernel",
    "spectral_density_kernel", "e0_kernel", "e0_profile", "scaled_density_kernel",
    "e1_scaled_kernel", "d_lambda_scaled_density", "kernel_matrix",
]

ALPHA_MIN = -0.25
ALPHA_MAX = specfun.NU_MAX ** 2 - 0.25


def nu_from_alpha(alpha: float) -> float:
    """Bessel order ``sqrt(1/4 + alpha)``."""
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < ALPHA_MIN:
        raise DomainError(f"alpha must be >= -1/4, got {alpha!r}")
    return math.sqrt(0.25 + alpha)


@dataclass(frozen=True)
class OperatorParams:
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        nu_from_alpha(self.alpha)
        if self.alpha > ALPHA_MAX:
            raise DomainError(f"alpha must be <= {ALPHA_MAX:g} (order <= {specfun.NU_MAX:g})")

    @property
    def nu(self) -> float:
        return nu_from_alpha(self.alpha)

    @classmethod
    def from_nu(cls, nu: float) -> "OperatorParams":
        return cls(nu * nu - 0.25)

    @property
    def max_dispersive_s(self) -> float:
        """Largest weight exponent for which the dispersive bound is claimed."""
        return self.nu + 0.5


def weight(s, x):
    """``(1 + x)^(-s)``."""
    x = np.asarray(x, dtype=float)
    if x.size and x.min() < 0.0:
        raise DomainError("weight is defined for x >= 0")
    out = (1.0 + x) ** (-float(s))
    return float(out) if out.ndim == 0 else out


def _positive(name, v):
    a = np.asarray(v, dtype=float)
    if a.size and (not np.all(np.isfinite(a)) or a.min() <= 0.0):
        raise DomainError(f"{name} must be finite and > 0")
    return a


def _scalar(out):
    out = np.asarray(out)
    return out.item() if out.ndim == 0 else out


def eigenfunctions(params: OperatorParams, lam, x):
    """Regular and outgoing solutions ``(u1, u2)`` at energy ``lam``.

    ``u1 = sqrt(x) J_nu(k x)`` vanishes at the origin; ``u2`` uses the
    Hankel combination ``J_nu + i Y_nu`` and is outgoing at infinity.
    """
    k = np.sqrt(_positive("lambda", lam))
    x = _positive("x", x)
    j, y = specfun.bessel_jy(params.nu, k * x)
    r = np.sqrt(x)
    return _scalar(r * j), _scalar(r * (j + 1j * y))


def resolvent_kernel(params: OperatorParams, lam, x, y):
    """Boundary value ``R(lam + i0, x, y)`` of the resolvent kernel."""
    k = np.sqrt(_positive("lambda", lam))
    x = _positive("x", x)
    y = _positive("y", y)
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    j_lo = specfun.bessel_j(params.nu, k * lo)
    j_hi, y_hi = specfun.bessel_jy(params.nu, k * hi)
    out = 0.5j * np.pi * np.sqrt(x * y) * j_lo * (j_hi + 1j * y_hi)
    return _scalar(out)


def spectral_density_kernel(params: OperatorParams, lam, x, y):
    """``(1/2) sqrt(xy) J_nu(k x) J_nu(k y)`` with ``k = sqrt(lam)``."""
    k = np.sqrt(_positive("lambda", lam))
    x = _positive("x", x)
    y = _positive("y", y)
    nu = params.nu
    out = 0.5 * np.sqrt(x * y) * (specfun.bessel_j(nu, k * x) * specfun.bessel_j(nu, k * y))
    return _scalar(out)


def _e0_const(nu):
    # limit of lam^-nu E from J_nu(z) ~ (z/2)^nu / Gamma(nu+1)
    return 1.0 / (2.0 ** (2.0 * nu + 1.0) * specfun.gamma(nu + 1.0) ** 2)


def e0_profile(params: OperatorParams, x):
    """Factor ``g`` with ``E0(x, y) = g(x) g(y)``."""
    x = _positive("x", x)
    nu = params.nu
    return _scalar(x ** (nu + 0.5) * math.sqrt(_e0_const(nu)))


def e0_kernel(params: OperatorParams, x, y):
    """Threshold kernel ``lim lam^-nu E = (xy)^(nu+1/2) / (2^(2nu+1) Gamma(nu+1)^2)``."""
    x = _positive("x", x)
    y = _positive("y", y)
    nu = params.nu
    return _scalar((x * y) ** (nu + 0.5) * _e0_const(nu))


def scaled_density_kernel(params: OperatorParams, lam, x, y):
    """``lam^(-nu) E(lam, x, y) = E0(x, y) Jhat(kx) Jhat(ky)``, finite as ``lam -> 0``."""
    k = np.sqrt(_positive("lambda", lam))
    x = _positive("x", x)
    y = _positive("y", y)
    nu = params.nu
    a = _normalized_j(nu, k * x)
    b = _normalized_j(nu, k * y)
    return _scalar(np.asarray(e0_kernel(params, x, y)) * (a * b))


def _normalized_j(nu, z):
    # Jhat(z) = Gamma(nu+1) (2/z)^nu J_nu(z); 1 + (Jhat - 1) cancels once Jhat is small
    z = np.asarray(z, dtype=float)
    near = np.minimum(z, 1.0)
    far = np.maximum(z, 1.0)
    direct = specfun.gamma(nu + 1.0) * (2.0 / far) ** nu * specfun.bessel_j(nu, far)
    return np.where(z <= 1.0, 1.0 + specfun.bessel_j_normalized_m1(nu, near), direct)


def e1_scaled_kernel(params: OperatorParams, lam, x, y):
    """``lam^(-nu) E(lam, x, y) - E0(x, y)`` without cancellation at small ``lam``.

    With ``a = Jhat(kx) - 1`` and ``b = Jhat(ky) - 1`` for the normalized
    ``Jhat(z) = Gamma(nu+1) (2/z)^nu J_nu(z)``, the difference is
    ``E0 (a b + (a + b))``, grouped so that swapping x and y is exact.
    """
    k = np.sqrt(_positive("lambda", lam))
    x = _positive("x", x)
    y = _positive("y", y)
    nu = params.nu
    a = specfun.bessel_j_normalized_m1(nu, k * x)
    b = specfun.bessel_j_normalized_m1(nu, k * y)
    return _scalar(np.asarray(e0_kernel(params, x, y)) * (a * b + (a + b)))


def d_lambda_scaled_density(params: OperatorParams, lam, x, y):
    """``d/dlam [lam^(-nu) E(lam, x, y)]`` from the Bessel recurrences."""
    lam = _positive("lambda", lam)
    k = np.sqrt(lam)
    x = _positive("x", x)
    y = _positive("y", y)
    nu = params.nu
    jx = specfun.bessel_j(nu, k * x)
    jy = specfun.bessel_j(nu, k * y)
    jx1 = specfun.bessel_j_shifted(nu, k * x)
    jy1 = specfun.bessel_j_shifted(nu, k * y)
    out = -0.25 * lam ** (-nu - 0.5) * np.sqrt(x * y) * (x * jx1 * jy + y * jy1 * jx)
    return _scalar(out)


def kernel_matrix(grid: Grid, kernel, *args, symmetric=True) -> KernelMatrix:
    """Sample ``kernel(*args, x, y)`` on ``grid x grid``."""
    return KernelMatrix.from_kernel(grid, lambda x, y: kernel(*args, x, y), symmetric=symmetric)
