import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfline import operator as op
from halfline.errors import DomainError
from halfline.grid import Grid, KernelMatrix, WaveFunction, panel_edges

P0 = op.OperatorParams(0.0)
P1 = op.OperatorParams(1.0)

positions = st.floats(min_value=0.05, max_value=30.0)
energies = st.floats(min_value=1e-3, max_value=20.0)
alphas = st.floats(min_value=-0.25, max_value=12.0)


def test_nu_values():
    assert op.nu_from_alpha(0.0) == 0.5
    assert op.nu_from_alpha(-0.25) == 0.0
    assert op.nu_from_alpha(2.0) == 1.5
    assert P1.nu == pytest.approx(1.118033988749895, rel=1e-15)
    assert op.OperatorParams.from_nu(2.5).alpha == pytest.approx(6.0)
    assert P1.max_dispersive_s == pytest.approx(P1.nu + 0.5)


def test_params_domain():
    with pytest.raises(DomainError):
        op.OperatorParams(-0.3)
    with pytest.raises(DomainError):
        op.OperatorParams(math.nan)
    with pytest.raises(DomainError):
        op.OperatorParams(500.0)


def test_weight():
    assert op.weight(1.0, 1.0) == 0.5
    assert np.allclose(op.weight(0.5, [0.0, 3.0]), [1.0, 0.5])
    with pytest.raises(DomainError):
        op.weight(1.0, -1.0)


def test_eigenfunctions_half_order():
    x = np.linspace(0.1, 10, 50)
    u1, u2 = op.eigenfunctions(P0, 4.0, x)
    c = math.sqrt(2 / (2 * math.pi))
    assert np.allclose(u1, c * np.sin(2 * x), atol=1e-14)
    assert np.allclose(u2, -1j * c * np.exp(2j * x), atol=1e-14)


def test_density_closed_form_alpha0():
    assert op.spectral_density_kernel(P0, 1.0, 1.0, 1.0) == pytest.approx(
        math.sin(1.0) ** 2 / math.pi, rel=1e-14)
    # nu = 1/2: E0 = xy / pi and lam^-1/2 E - E0 = (sin^2 1 - 1) / pi at lam = 1
    assert op.e0_kernel(P0, 1.0, 1.0) == pytest.approx(1.0 / math.pi, rel=1e-14)
    assert op.e0_kernel(P0, 2.0, 3.0) == pytest.approx(6.0 / math.pi, rel=1e-14)
    assert op.e1_scaled_kernel(P0, 1.0, 1.0, 1.0) == pytest.approx(-math.cos(1.0) ** 2 / math.pi, rel=1e-13)
    assert abs(op.e1_scaled_kernel(P0, 1e-8, 1.0, 1.0)) < 1e-4 * op.e0_kernel(P0, 1.0, 1.0)


def test_resolvent_frozen():
    assert op.resolvent_kernel(P0, 1.0, 1.0, 2.0) == pytest.approx(
        -0.35017548837401463 + 0.7651474012342926j, rel=1e-13)
    assert op.resolvent_kernel(P0, 4.0, 1.0, 1.0) == pytest.approx(
        -0.18920062382698205 + 0.41341090521590296j, rel=1e-13)
    # alpha = 0: sin(k min) e^{ik max} / k
    assert op.resolvent_kernel(P0, 1.0, 1.0, 2.0) == pytest.approx(math.sin(1.0) * np.exp(2j), rel=1e-13)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0, 6.0])
def test_e0_is_threshold_limit(alpha):
    p = op.OperatorParams(alpha)
    mp.mp.dps = 40
    x, y, lam = 0.8, 2.5, mp.mpf("1e-12")
    k = mp.sqrt(lam)
    scaled = mp.mpf(0.5) * mp.sqrt(x * y) * mp.besselj(p.nu, k * x) * mp.besselj(p.nu, k * y) / lam ** p.nu
    assert op.e0_kernel(p, x, y) == pytest.approx(float(scaled), rel=1e-10)


def test_d_lambda_frozen():
    assert op.d_lambda_scaled_density(P1, 0.7, 1.3, 2.1) == pytest.approx(-0.2283962165408608, rel=1e-12)


@given(alphas, energies, positions, positions)
@settings(max_examples=150)
def test_stone_consistency(alpha, lam, x, y):
    p = op.OperatorParams(alpha)
    r = op.resolvent_kernel(p, lam, x, y)
    e = op.spectral_density_kernel(p, lam, x, y)
    scale = 0.5 * math.sqrt(x * y) * 1.0 / math.sqrt(lam) + abs(e)
    assert abs(r.imag / math.pi - e) <= 1e-12 * max(scale, 1.0)


@given(alphas, energies, positions, positions)
@settings(max_examples=150)
def test_kernels_symmetric(alpha, lam, x, y):
    p = op.OperatorParams(alpha)
    assert op.resolvent_kernel(p, lam, x, y) == op.resolvent_kernel(p, lam, y, x)
    assert op.spectral_density_kernel(p, lam, x, y) == op.spectral_density_kernel(p, lam, y, x)
    assert op.e1_scaled_kernel(p, lam, x, y) == op.e1_scaled_kernel(p, lam, y, x)


@given(alphas, energies, positions, positions)
@settings(max_examples=150)
def test_density_scaling_c2(alpha, lam, x, y):
    p = op.OperatorParams(alpha)
    lhs = op.spectral_density_kernel(p, lam / 4.0, 2 * x, 2 * y)
    rhs = 2.0 * op.spectral_density_kernel(p, lam, x, y)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(alphas, positions, positions, positions, positions)
def test_e0_rank_one_determinant(alpha, x1, x2, y1, y2):
    p = op.OperatorParams(alpha)
    a = op.e0_kernel(p, x1, y1) * op.e0_kernel(p, x2, y2)
    b = op.e0_kernel(p, x1, y2) * op.e0_kernel(p, x2, y1)
    assert abs(a - b) <= 1e-12 * max(a, b)
    g = op.e0_profile(p, np.array([x1, x2]))
    assert g[0] * g[1] == pytest.approx(op.e0_kernel(p, x1, x2), rel=1e-13)


@given(alphas, energies, positions, positions)
@settings(max_examples=150)
def test_density_decomposition(alpha, lam, x, y):
    p = op.OperatorParams(alpha)
    scaled = op.scaled_density_kernel(p, lam, x, y)
    assert scaled == pytest.approx(op.e0_kernel(p, x, y) + op.e1_scaled_kernel(p, lam, x, y),
                                   rel=1e-10, abs=1e-13 * op.e0_kernel(p, x, y))
    e = op.spectral_density_kernel(p, lam, x, y)
    assert lam ** p.nu * scaled == pytest.approx(e, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
def test_remainder_leading_order(alpha):
    # Jhat(z) - 1 ~ -z^2 / (4(nu+1)) so e1 / lam -> -E0 (x^2 + y^2) / (4(nu+1))
    p = op.OperatorParams(alpha)
    x, y = 1.3, 0.6
    lead = -op.e0_kernel(p, x, y) * (x * x + y * y) / (4 * (p.nu + 1))
    prev = math.inf
    for k in range(2, 9):
        lam = 10.0 ** (-k)
        e1 = op.e1_scaled_kernel(p, lam, x, y)
        assert abs(e1) < prev
        prev = abs(e1)
        if k >= 5:
            assert e1 / lam == pytest.approx(lead, rel=1e-4)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 3.0])
def test_d_lambda_matches_finite_difference(alpha):
    p = op.OperatorParams(alpha)
    x = np.array([0.4, 1.0, 2.5])[:, None]
    y = np.array([0.7, 1.9])[None, :]
    for lam in (0.05, 0.7, 3.0):
        h = 1e-5 * lam
        fd = (op.scaled_density_kernel(p, lam + h, x, y) - op.scaled_density_kernel(p, lam - h, x, y)) / (2 * h)
        assert np.allclose(op.d_lambda_scaled_density(p, lam, x, y), fd, rtol=1e-5, atol=1e-10)


def test_against_mpmath_density():
    mp.mp.dps = 30
    p = op.OperatorParams(3.0)
    nu = p.nu
    for lam, x, y in [(0.3, 0.8, 2.2), (5.0, 0.1, 7.0), (1e-4, 3.0, 4.0)]:
        k = mp.sqrt(lam)
        ref = float(mp.mpf(0.5) * mp.sqrt(x * y) * mp.besselj(nu, k * x) * mp.besselj(nu, k * y))
        assert op.spectral_density_kernel(p, lam, x, y) == pytest.approx(ref, rel=1e-12)


def test_kernel_domain_errors():
    with pytest.raises(DomainError):
        op.spectral_density_kernel(P0, 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        op.resolvent_kernel(P0, 1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        op.e0_kernel(P0, 0.0, 1.0)


def test_kernel_matrix_and_weighting():
    g = Grid.gauss_legendre(20.0, 1.0, order=8)
    m = op.kernel_matrix(g, op.e0_kernel, P0)
    assert m.symmetric
    w = m.weighted(2.0).weighted(1.0)
    assert w.weight_exponent_s == 3.0
    rho = (1 + g.points) ** -3.0
    assert np.allclose(w.entries, rho[:, None] * m.entries * rho[None, :])
    with pytest.raises(ValueError):
        KernelMatrix(g, np.arange(len(g) ** 2, dtype=float).reshape(len(g), -1), symmetric=True)


# grid helpers

def test_gauss_legendre_grid_integrates_polynomials():
    g = Grid.gauss_legendre(3.0, 0.5, order=8)
    assert g.integrate(g.points ** 5) == pytest.approx(3.0 ** 6 / 6, rel=1e-13)
    assert g.points[0] > 0 and g.points[-1] < 3.0


def test_panel_edges_properties():
    e = panel_edges(50.0, 2.0, first_width=0.5)
    assert e[0] == 0.0 and e[-1] == 50.0
    assert np.all(np.diff(e) > 0)
    assert np.diff(e).max() <= 2.0 + 1e-12


def test_uniform_and_geometric():
    g = Grid.uniform(10.0, 9)
    assert np.allclose(g.points, np.arange(1, 10))
    assert g.integrate(np.ones(9)) == pytest.approx(9.0)
    geo = Grid.geometric(1e-2, 1e2, 400)
    assert geo.integrate(1.0 / geo.points) == pytest.approx(math.log(1e4), rel=1e-4)
    r = g.refined(2)
    assert len(r) == 18 and r.integrate(np.ones(18)) == pytest.approx(9.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(np.array([0.0, 1.0]), np.ones(2), 2.0)
    with pytest.raises(ValueError):
        Grid(np.array([1.0, 0.5]), np.ones(2), 2.0)
    with pytest.raises(ValueError):
        Grid(np.array([1.0, 3.0]), np.ones(2), 2.0)
    with pytest.raises(ValueError):
        Grid(np.array([1.0, 2.0]), np.array([1.0, -1.0]), 2.0)


def test_wavefunction_norms():
    g = Grid.gauss_legendre(30.0, 0.5)
    psi = WaveFunction.from_function(g, lambda x: np.exp(-x))
    assert psi.norm() == pytest.approx(math.sqrt(0.5), rel=1e-12)
    # int (1+x)^2 e^{-2x} = 1/2 + 1/2 + 1/4
    assert psi.weighted_norm(1.0) == pytest.approx(math.sqrt(1.25), rel=1e-12)
    assert psi.tail_mass() < 1e-10
    assert (2 * psi).distance(psi) == pytest.approx(psi.norm())
    with pytest.raises(ValueError):
        WaveFunction(g, np.full(len(g), np.nan))
