import math
import warnings

import numpy as np
import pytest

from halfline import hankel
from halfline.errors import DomainError, ResolutionError, TruncationWarning
from halfline.grid import Grid, WaveFunction
from halfline.operator import OperatorParams


def gaussian(grid, center=5.0, width=1.0):
    return WaveFunction.from_function(grid, lambda x: np.exp(-((x - center) / width) ** 2))


@pytest.fixture(scope="module")
def wide_grid():
    return Grid.gauss_legendre(40.0, 0.1)


@pytest.fixture(scope="module")
def bump_grid():
    return Grid.gauss_legendre(15.0, 0.1)


def test_sine_transform_oracle(wide_grid):
    # nu = 1/2: int e^{-x} sqrt(x) J_1/2(x sqrt p) dx = sqrt(2/pi) p^(1/4) / (1 + p)
    p = OperatorParams(0.0)
    psi = WaveFunction.from_function(wide_grid, lambda x: np.exp(-x))
    sg = hankel.SpectralGrid.build(25.0, 40.0)
    f = hankel.forward(p, psi, sg)
    q = sg.p_points
    ref = math.sqrt(2 / math.pi) * q ** 0.25 / (1 + q)
    assert np.max(np.abs(f - ref)) < 1e-9


@pytest.mark.parametrize("alpha", [-0.2, 0.0, 1.0, 3.0])
def test_plancherel(wide_grid, alpha):
    p = OperatorParams(alpha)
    psi = gaussian(wide_grid)
    sg = hankel.SpectralGrid.for_state(p, psi)
    f = hankel.forward(p, psi, sg)
    assert hankel.spectral_norm(f, sg) == pytest.approx(psi.norm(), rel=1e-6)


@pytest.mark.parametrize("alpha", [-0.2, 0.0, 1.0, 3.0])
def test_round_trip(bump_grid, alpha):
    p = OperatorParams(alpha)
    psi = gaussian(bump_grid)
    sg = hankel.SpectralGrid.for_state(p, psi)
    back = hankel.inverse(p, hankel.forward(p, psi, sg), bump_grid, sg)
    assert back.distance(psi) < 1e-6 * psi.norm()


def test_zero_in_zero_out(bump_grid):
    p = OperatorParams(1.0)
    zero = WaveFunction(bump_grid, np.zeros(len(bump_grid)))
    sg = hankel.SpectralGrid.build(30.0, 15.0)
    f = hankel.forward(p, zero, sg)
    assert not np.any(f)
    assert not np.any(hankel.inverse(p, f, bump_grid, sg).values)


def test_time_zero_is_identity(bump_grid):
    p = OperatorParams(0.5)
    psi = gaussian(bump_grid)
    sg = hankel.SpectralGrid.for_state(p, psi)
    assert hankel.evolve_diagonalized(p, psi, 0.0, sg).distance(psi) < 1e-6 * psi.norm()


def test_evolution_matches_images_alpha0():
    # for alpha = 0 the transform is a sine transform; compare with the images kernel by quadrature
    from halfline import propagator as pr

    p = OperatorParams(0.0)
    g = Grid.gauss_legendre(12.0, 0.05)
    psi = gaussian(g)
    out = Grid.gauss_legendre(30.0, 0.1)
    sg = hankel.SpectralGrid.for_state(p, psi, t_max=1.0, x_max=30.0)
    a = hankel.evolve_diagonalized(p, psi, 1.0, sg, out)
    x, y = out.points[:, None], g.points[None, :]
    b = pr.free_dirichlet_kernel(1.0, x, y) @ (g.quad_weights * psi.values)
    assert np.sqrt(out.integrate(np.abs(a.values - b) ** 2)) < 1e-6


def test_unresolved_phase_raises(bump_grid):
    p = OperatorParams(0.0)
    psi = gaussian(bump_grid)
    sg = hankel.SpectralGrid.for_state(p, psi)
    with pytest.raises(ResolutionError):
        hankel.evolve_diagonalized(p, psi, 1e4, sg)


def test_spectral_grid_panels():
    sg = hankel.SpectralGrid.build(100.0, 20.0, t_max=5.0)
    assert sg.phase_resolved(5.0)
    assert not sg.phase_resolved(50.0)
    assert sg.integrate(np.ones(len(sg))) == pytest.approx(100.0, rel=1e-12)
    assert sg.integrate(sg.p_points) == pytest.approx(5000.0, rel=1e-12)
    with pytest.raises(DomainError):
        hankel.SpectralGrid.build(-1.0, 1.0)


def test_truncation_warnings():
    p = OperatorParams(0.0)
    g = Grid.gauss_legendre(6.0, 0.1)
    psi = gaussian(g)
    sg = hankel.SpectralGrid.build(20.0, 6.0)
    with pytest.warns(TruncationWarning):
        hankel.forward(p, psi, sg)
    with pytest.warns(TruncationWarning):
        hankel.inverse(p, np.ones(len(sg)), g, sg)


def test_cutoff_scales_with_width(wide_grid):
    p = OperatorParams(1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        wide = hankel.spectral_cutoff(p, gaussian(wide_grid, 10.0, 2.0))
        narrow = hankel.spectral_cutoff(p, gaussian(wide_grid, 10.0, 0.5))
    assert narrow > 4 * wide
