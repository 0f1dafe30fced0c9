"""Finite-difference reference model of the half-line operator on ``[0, L]``.

Nodes ``x_j = (j+1) h``, ``h = L/(n+1)``, Dirichlet at both ends.  The
symmetric tridiagonal matrix is diagonalized with implicit-shift QL; the
eigenvectors come either from accumulating the QL rotations or, for large
``n``, from inverse iteration at the converged eigenvalues.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .errors import ConvergenceError, DomainError, ResolutionError, TruncationWarning
from .grid import Grid, KernelMatrix, WaveFunction
from .operator import OperatorParams

QL_MAX_SWEEPS = 60
DENSE_MAX_N = 5000
SCHEMES = ("standard", "power")


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix with its grid spacing and domain length."""

    diag: np.ndarray
    offdiag: np.ndarray
    h: float
    L: float
    scheme: str = "standard"

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=float)
        e = np.ascontiguousarray(self.offdiag, dtype=float)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)
        if d.ndim != 1 or e.shape != (max(d.size - 1, 0),):
            raise ValueError("offdiag must have length len(diag) - 1")

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)

    def grid(self) -> Grid:
        return Grid.uniform(self.L, self.n)

    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral norm."""
        a = np.abs(self.offdiag)
        r = np.abs(self.diag).copy()
        r[:-1] += a
        r[1:] += a
        return float(r.max())

    def matvec(self, v):
        out = self.diag[:, None] * v if v.ndim == 2 else self.diag * v
        out[:-1] += self.offdiag[:, None] * v[1:] if v.ndim == 2 else self.offdiag * v[1:]
        out[1:] += self.offdiag[:, None] * v[:-1] if v.ndim == 2 else self.offdiag * v[:-1]
        return out


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues and eigenvectors normalized by ``h sum v^2 = 1``."""

    values: np.ndarray
    vectors: np.ndarray
    h: float

    def residuals(self, T: TridiagonalMatrix) -> np.ndarray:
        """``||T v - lambda v||`` per pair for unit Euclidean ``v``."""
        q = self.vectors * math.sqrt(self.h)
        return np.linalg.norm(T.matvec(q) - q * self.values, axis=0)

    def orthonormality_error(self) -> float:
        q = self.vectors * math.sqrt(self.h)
        g = q.T @ q
        g[np.diag_indices_from(g)] -= 1.0
        return float(np.max(np.abs(g)))


def discretize(params: OperatorParams, L: float, n: int, scheme: str = "standard") -> TridiagonalMatrix:
    """Second-order finite-difference matrix of ``-d^2/dx^2 + alpha/x^2``.

    ``scheme="standard"`` samples ``alpha/x_j^2``.  ``scheme="power"``
    replaces it by the value that makes ``x^(nu+1/2)`` an exact discrete
    zero-energy solution, ``(j+1)^a - 2 j^a + (j-1)^a`` over ``h^2 j^a``
    with ``a = nu + 1/2``.  The two agree at ``alpha = 0``; the power form
    keeps second-order accuracy for ``alpha < 0``, where sampling the
    potential converges only like ``h^(2 nu)``.
    """
    if not isinstance(params, OperatorParams):
        params = OperatorParams(params)
    n = int(n)
    if n < 2:
        raise DomainError("n must be >= 2")
    if not L > 0:
        raise DomainError("L must be positive")
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}")
    h = L / (n + 1)
    j = np.arange(1, n + 1, dtype=float)
    if scheme == "standard":
        pot = params.alpha / (h * j) ** 2
    else:
        a = params.nu + 0.5
        pot = ((j + 1.0) ** a - 2.0 * j ** a + (j - 1.0) ** a) / (h * h * j ** a)
    return TridiagonalMatrix(2.0 / h**2 + pot, np.full(n - 1, -1.0 / h**2), h, float(L), scheme)


@numba.njit(cache=True)
def _ql(d, e, zt, want, max_sweeps):
    """Implicit-shift QL on (d, e) in place; ``e[n-1]`` must be zero.

    Rows of ``zt`` receive the rotations when ``want``.  Returns -1 on
    success or the index whose sweep count hit the cap.
    """
    n = d.shape[0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_sweeps:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want:
                    for k in range(zt.shape[1]):
                        f = zt[i + 1, k]
                        zt[i + 1, k] = s * zt[i, k] + c * f
                        zt[i, k] = c * zt[i, k] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


@numba.njit(cache=True)
def _solve_shifted(d, e, shift, b, floor):
    """Solve ``(T - shift) x = b`` by LU with partial pivoting (tridiagonal)."""
    n = d.shape[0]
    # U has up to two superdiagonals after pivoting
    u0 = np.empty(n)
    u1 = np.zeros(n)
    u2 = np.zeros(n)
    x = b.copy()
    a0 = d[0] - shift
    a1 = e[0] if n > 1 else 0.0
    for i in range(n - 1):
        sub = e[i]
        nd = d[i + 1] - shift
        ne = e[i + 1] if i + 2 < n else 0.0
        if abs(a0) >= abs(sub):
            if a0 == 0.0:
                a0 = floor
            m = sub / a0
            u0[i] = a0
            u1[i] = a1
            u2[i] = 0.0
            a0 = nd - m * a1
            a1 = ne
            x[i + 1] -= m * x[i]
        else:
            m = a0 / sub
            u0[i] = sub
            u1[i] = nd
            u2[i] = ne
            a0 = a1 - m * nd
            a1 = -m * ne
            tmp = x[i]
            x[i] = x[i + 1]
            x[i + 1] = tmp - m * x[i + 1]
    if a0 == 0.0:
        a0 = floor
    u0[n - 1] = a0
    x[n - 1] /= u0[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / u0[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - u1[i] * x[i + 1] - u2[i] * x[i + 2]) / u0[i]
    return x


@numba.njit(cache=True)
def _inverse_iteration(d, e, values, cluster_tol, tnorm, iters):
    """Eigenvectors (rows, unit 2-norm) for sorted ``values``.

    After every solve the iterate is orthogonalized, twice by classical
    Gram-Schmidt, against the earlier vectors whose eigenvalues lie within
    ``cluster_tol``.
    """
    n = d.shape[0]
    nv = values.shape[0]
    q = np.zeros((nv, n))
    eps = 2.220446049250313e-16
    floor = eps * tnorm
    first = 0
    np.random.seed(12345)
    for k in range(nv):
        while values[k] - values[first] > cluster_tol:
            first += 1
        shift = values[k]
        # separate numerically equal eigenvalues within a cluster
        if k > first and shift - values[k - 1] < 10.0 * eps * tnorm:
            shift = values[k - 1] + 10.0 * eps * tnorm
        v = np.random.uniform(-1.0, 1.0, n)
        for _ in range(iters):
            v = _solve_shifted(d, e, shift, v, floor)
            if k > first:
                block = q[first:k]
                for _pass in range(2):
                    v = v - np.dot(np.dot(block, v), block)
            v = v / np.sqrt(np.dot(v, v))
        # fix the sign: first sizeable component positive
        s = 0
        while s < n - 1 and abs(v[s]) < 1e-8:
            s += 1
        if v[s] < 0:
            v = -v
        q[k] = v
    return q


def tridiagonal_eigenvalues(T: TridiagonalMatrix) -> np.ndarray:
    """All eigenvalues, ascending, by implicit-shift QL."""
    d = T.diag.copy()
    e = np.zeros(T.n)
    e[:-1] = T.offdiag
    status = _ql(d, e, np.zeros((1, 1)), False, QL_MAX_SWEEPS)
    if status >= 0:
        raise ConvergenceError(f"QL iteration did not converge for eigenvalue index {status}")
    return np.sort(d)


def eigensolve_tridiagonal(T: TridiagonalMatrix, method: str = "auto",
                           max_n: int = DENSE_MAX_N) -> EigenDecomposition:
    """All eigenpairs of ``T``.

    ``method="ql"`` accumulates the QL rotations (O(n^3)); ``"inverse"``
    takes the QL eigenvalues and obtains eigenvectors by inverse iteration
    with reorthogonalization inside clusters (O(n^2)).  ``"auto"`` uses the
    former for ``n <= 400``.  ``max_n`` bounds the dense eigenvector storage.
    """
    n = T.n
    if n > max_n:
        raise DomainError(f"n = {n} exceeds the dense eigenvector limit {max_n}")
    if method == "auto":
        method = "ql" if n <= 400 else "inverse"
    if method == "ql":
        d = T.diag.copy()
        e = np.zeros(n)
        e[:-1] = T.offdiag
        zt = np.eye(n)
        status = _ql(d, e, zt, True, QL_MAX_SWEEPS)
        if status >= 0:
            raise ConvergenceError(f"QL iteration did not converge for eigenvalue index {status}")
        order = np.argsort(d, kind="stable")
        values = d[order]
        q = zt[order].T.copy()
        # same sign convention as the inverse-iteration path
        lead = np.argmax(np.abs(q) >= 1e-8, axis=0)
        q *= np.sign(q[lead, np.arange(n)])
    elif method == "inverse":
        values = tridiagonal_eigenvalues(T)
        tnorm = T.norm_bound()
        q = _inverse_iteration(T.diag, T.offdiag, values, 1e-3 * tnorm, tnorm, 3).T
    else:
        raise DomainError("method must be 'auto', 'ql' or 'inverse'")
    return EigenDecomposition(values, q / math.sqrt(T.h), T.h)


@lru_cache(maxsize=2)
def _decomposition(alpha, L, n, scheme, max_n):
    T = discretize(OperatorParams(alpha), L, n, scheme)
    return T, eigensolve_tridiagonal(T, max_n=max_n)


def _sample_initial(psi0, x):
    if callable(psi0):
        return np.asarray(psi0(x), dtype=complex)
    g = psi0.grid
    v = psi0.values
    xp = np.concatenate(([0.0], g.points))
    re = np.interp(x, xp, np.concatenate(([0.0], v.real)), right=0.0)
    im = np.interp(x, xp, np.concatenate(([0.0], v.imag)), right=0.0)
    return re + 1j * im


def evolve_reference(params: OperatorParams, psi0, t, L, n, scheme: str = "power",
                     max_n: int = DENSE_MAX_N) -> WaveFunction:
    """``sum_k exp(-i t lambda_k) <phi_k, psi0> phi_k`` on the finite-difference nodes.

    ``psi0`` is a :class:`WaveFunction` (linearly interpolated to the
    nodes) or a callable.  Decompositions are cached per configuration.
    """
    T, eig = _decomposition(params.alpha, float(L), int(n), scheme, max_n)
    x = T.nodes
    v0 = _sample_initial(psi0, x)
    grid = T.grid()
    start = WaveFunction(grid, v0)
    if start.tail_mass() > 1e-8:
        warnings.warn("initial state reaches the right wall", TruncationWarning, stacklevel=2)
    coef = eig.vectors.T @ (T.h * v0)
    out = WaveFunction(grid, eig.vectors @ (np.exp(-1j * float(t) * eig.values) * coef))
    if out.tail_mass() > 1e-8:
        warnings.warn(f"evolved state has relative tail mass {out.tail_mass():.2e} at L",
                      TruncationWarning, stacklevel=2)
    return out


def local_spacing(values, lam, count=10) -> float:
    """Median eigenvalue gap among the ``count`` eigenvalues nearest ``lam``."""
    i = int(np.searchsorted(values, lam))
    lo, hi = max(0, i - count // 2), min(values.size, i + count // 2 + 1)
    return float(np.median(np.diff(values[lo:hi])))


def resolvent_density_reference(params: OperatorParams, lam, epsilon, L, n, probes=None,
                                scheme: str = "power", min_eps_over_spacing: float = 1.0,
                                max_n: int = DENSE_MAX_N) -> KernelMatrix:
    """Lorentzian-smoothed spectral density ``(1/pi) Im (T - lam - i eps)^{-1}``.

    Assembled as ``sum_k (eps/pi) / ((lambda_k - lam)^2 + eps^2) phi_k phi_k^T``.
    With ``probes`` (increasing positions inside ``(0, L)``) the eigenvectors
    are linearly interpolated there; otherwise the kernel lives on all nodes.
    Raises :class:`ResolutionError` when ``epsilon`` is below
    ``min_eps_over_spacing`` local level spacings or when ``lam`` is within
    ten times the magnitude of a spurious negative eigenvalue.
    """
    lam = float(lam)
    epsilon = float(epsilon)
    if lam <= 0 or epsilon <= 0:
        raise DomainError("lambda and epsilon must be positive")
    T, eig = _decomposition(params.alpha, float(L), int(n), scheme, max_n)
    vals = eig.values
    spacing = local_spacing(vals, lam)
    if epsilon < min_eps_over_spacing * spacing:
        raise ResolutionError(
            f"epsilon = {epsilon:g} is below {min_eps_over_spacing:g} x level spacing {spacing:.3g}")
    if vals[0] < 0 and lam < 10.0 * abs(vals[0]):
        raise ResolutionError(f"lambda = {lam:g} too close to spurious eigenvalue {vals[0]:.3g}")
    w = (epsilon / math.pi) / ((vals - lam) ** 2 + epsilon**2)
    if probes is None:
        grid = T.grid()
        rows = eig.vectors
    else:
        p = np.asarray(probes, dtype=float)
        if p.min() <= 0 or p.max() >= T.L:
            raise DomainError("probe positions must lie inside (0, L)")
        pos = p / T.h - 1.0
        j0 = np.clip(np.floor(pos).astype(int), -1, T.n - 2)
        frac = pos - j0
        # node -1 is the Dirichlet wall at x = 0
        lower = np.where(j0[:, None] >= 0, eig.vectors[np.maximum(j0, 0)], 0.0)
        rows = (1 - frac)[:, None] * lower + frac[:, None] * eig.vectors[j0 + 1]
        gaps = np.diff(np.concatenate(([0.0], p)))
        grid = Grid(p, gaps, T.L)
    entries = (rows * w) @ rows.T
    entries = 0.5 * (entries + entries.T)
    return KernelMatrix(grid, entries, symmetric=True)
