import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from esisav import make_grid
from esisav.errors import ConfigError
from esisav.models import (
    QuarticPotential,
    allen_cahn,
    cahn_hilliard,
    chemical_potential,
    energy,
    linear_model,
    nonlinear_energy,
    pfc,
)
from esisav.spectral import DiagonalSymbol, identity_symbol, inner_product, laplacian_symbol

TWO_PI = 2 * np.pi


class TestPotentials:
    @pytest.mark.parametrize("phi,want", [(0.0, 0.0), (1.0, 0.0), (2.0, 6.0), (-1.0, 0.0)])
    def test_allen_cahn_derivative(self, grid8, phi, want):
        m = allen_cahn(grid8, 0.1)
        assert m.f_prime(np.full(grid8.shape, phi))[0, 0] == pytest.approx(want)

    def test_cahn_hilliard_beta(self, grid8):
        m = cahn_hilliard(grid8, 0.025, 2.0)
        assert m.f_prime(np.ones(grid8.shape))[0, 0] == pytest.approx(-2.0)
        assert m.f_density(np.ones(grid8.shape))[0, 0] == pytest.approx(1.0)
        m0 = cahn_hilliard(grid8, 0.025, 0.0)
        assert m0.f_prime(np.ones(grid8.shape))[0, 0] == pytest.approx(0.0)

    def test_pfc_derivative(self, grid8):
        m = pfc(grid8, 0.25)
        assert m.f_prime(np.zeros(grid8.shape))[0, 0] == 0.0
        assert m.f_prime(np.ones(grid8.shape))[0, 0] == pytest.approx(0.75)

    def test_minimum(self):
        assert QuarticPotential(1, 1, 0.25).minimum == pytest.approx(0.0)
        assert QuarticPotential(1, 0.25, 0).minimum == pytest.approx(-0.015625)
        assert QuarticPotential(0, 0, 0).minimum == 0.0
        assert QuarticPotential(0, 1, 0).minimum == -np.inf

    @given(st.floats(-3, 3), st.floats(0.1, 2), st.floats(-1, 3))
    def test_derivative_matches_density(self, phi, q, a):
        p = QuarticPotential(q, a, 0.3)
        h = 1e-6
        fd = (p.density(phi + h) - p.density(phi - h)) / (2 * h)
        exact = p.derivative(np.array([[phi]]))[0, 0]
        assert fd == pytest.approx(exact, rel=1e-6, abs=1e-7)


class TestFactories:
    def test_symbols(self, grid8):
        ac = allen_cahn(grid8, 0.1)
        np.testing.assert_allclose(ac.l_symbol.table, 0.01 * grid8.k2)
        np.testing.assert_allclose(ac.g_symbol.table, 1.0)
        ch = cahn_hilliard(grid8, 0.1, 2.0)
        np.testing.assert_allclose(ch.l_symbol.table, 0.01 * grid8.k2 + 2.0)
        np.testing.assert_allclose(ch.g_symbol.table, grid8.k2)
        ph = pfc(grid8, 0.25)
        np.testing.assert_allclose(ph.l_symbol.table, (1 - grid8.k2) ** 2)

    def test_default_scales(self, grid8):
        assert allen_cahn(grid8, 0.1).scale_c == 1000.0
        assert cahn_hilliard(grid8, 0.1).scale_c == pytest.approx(4 * np.pi**2)
        assert pfc(grid8, 0.1).scale_c == pytest.approx(4 * np.pi**2)

    @pytest.mark.parametrize("factory", [allen_cahn, pfc])
    @pytest.mark.parametrize("eps", [0.0, -1.0, np.nan])
    def test_rejects_bad_epsilon(self, grid8, factory, eps):
        with pytest.raises(ConfigError):
            factory(grid8, eps)

    def test_rejects_negative_beta(self, grid8):
        with pytest.raises(ConfigError):
            cahn_hilliard(grid8, 0.1, -0.5)

    def test_rejects_bad_scale(self, grid8):
        with pytest.raises(ConfigError):
            allen_cahn(grid8, 0.1, 0.0)

    def test_rejects_indefinite_mobility(self, grid8):
        with pytest.raises(ConfigError):
            linear_model(grid8, identity_symbol(grid8), laplacian_symbol(grid8))

    def test_mass_conservation_flag(self, grid8):
        assert not allen_cahn(grid8, 0.1).conserves_mass
        assert cahn_hilliard(grid8, 0.1).conserves_mass
        assert pfc(grid8, 0.1).conserves_mass


class TestEnergy:
    def test_well_bottom(self, grid16):
        assert energy(allen_cahn(grid16, 0.1), np.ones(grid16.shape)) == pytest.approx(0.0, abs=1e-14)

    def test_cos_x_closed_form(self, grid16):
        # 1/2 eps^2 int sin^2 x + 1/4 int sin^4 x on [0, 2pi]^2
        x, _ = grid16.mesh
        want = 0.5 * 0.01 * 2 * np.pi**2 + 0.25 * 3 / 8 * 4 * np.pi**2
        assert energy(allen_cahn(grid16, 0.1), np.cos(x)) == pytest.approx(want, rel=1e-13)
        assert want == pytest.approx(3.79980, abs=1e-5)

    def test_against_quadrature(self):
        g = make_grid(32, 32, TWO_PI, TWO_PI)
        x, y = g.mesh
        phi = 0.1 * np.cos(x) * np.cos(y) + 0.3 * np.sin(2 * y)
        eps = 0.1

        def density(yy, xx):
            p = 0.1 * np.cos(xx) * np.cos(yy) + 0.3 * np.sin(2 * yy)
            px = -0.1 * np.sin(xx) * np.cos(yy)
            py = -0.1 * np.cos(xx) * np.sin(yy) + 0.6 * np.cos(2 * yy)
            return 0.5 * eps**2 * (px**2 + py**2) + 0.25 * (p**2 - 1) ** 2

        want, _ = integrate.dblquad(density, 0, TWO_PI, 0, TWO_PI, epsabs=1e-11, epsrel=1e-11)
        assert energy(allen_cahn(g, eps), phi) == pytest.approx(want, rel=1e-9)

    def test_pfc_chemical_potential(self, grid16):
        x, _ = grid16.mesh
        m = pfc(grid16, 0.25)
        phi = np.cos(x) + 0.5 * np.cos(2 * x)
        want = phi**3 - 0.25 * phi + 0.5 * 9 * np.cos(2 * x)
        np.testing.assert_allclose(chemical_potential(m, phi), want, atol=1e-11)

    def test_nonlinear_part(self, grid16):
        m = allen_cahn(grid16, 0.1)
        assert nonlinear_energy(m, np.zeros(grid16.shape)) == pytest.approx(0.25 * 4 * np.pi**2)


@given(arrays(np.float64, (8, 8), elements=st.floats(-1.5, 1.5)),
       arrays(np.float64, (8, 8), elements=st.floats(-1, 1)))
def test_chemical_potential_is_variational_derivative(phi, v):
    g = make_grid(8, 8, TWO_PI, TWO_PI)
    m = cahn_hilliard(g, 0.3, 1.0)
    h = 1e-6
    fd = (energy(m, phi + h * v) - energy(m, phi - h * v)) / (2 * h)
    exact = inner_product(g, chemical_potential(m, phi), v)
    assert fd == pytest.approx(exact, rel=1e-6, abs=1e-6)


@given(arrays(np.float64, (8, 8), elements=st.floats(-2, 2)), st.integers(0, 7), st.integers(0, 7))
def test_energy_translation_invariant(phi, sx, sy):
    g = make_grid(8, 8, TWO_PI, TWO_PI)
    m = pfc(g, 0.25)
    shifted = np.roll(np.roll(phi, sx, axis=0), sy, axis=1)
    assert energy(m, shifted) == pytest.approx(energy(m, phi), rel=1e-12, abs=1e-12)


def test_linear_model_energy_is_quadratic(grid8, rng):
    m = linear_model(grid8, DiagonalSymbol(grid8, grid8.k2), identity_symbol(grid8))
    phi = rng.standard_normal(grid8.shape)
    assert energy(m, 2 * phi) == pytest.approx(4 * energy(m, phi), rel=1e-13)
