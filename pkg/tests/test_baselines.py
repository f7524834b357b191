import math

import numpy as np
import pytest

from esisav import make_grid
from esisav.baselines import (
    default_c0,
    new_sav_initial_state,
    new_sav_step,
    sav_initial_state,
    sav_modified_energy,
    sav_step,
    semi_implicit_step,
)
from esisav.errors import ConfigError, NumericalError
from esisav.models import allen_cahn, cahn_hilliard, linear_model, pfc
from esisav.spectral import DiagonalSymbol, forward, identity_symbol

TWO_PI = 2 * np.pi


@pytest.fixture
def ac():
    return allen_cahn(make_grid(16, 16, TWO_PI, TWO_PI), 0.1)


def _phi0(model):
    x, y = model.grid.mesh
    return 0.1 * np.cos(x) * np.cos(y)


def test_default_c0(ac):
    assert default_c0(ac) == 1.0
    m = pfc(make_grid(8, 8, 10.0, 10.0), 0.25)
    assert default_c0(m) == pytest.approx(1 + 100 * 0.25**2 / 4)


def test_default_c0_unbounded(grid8):
    m = linear_model(grid8, identity_symbol(grid8), identity_symbol(grid8))
    object.__setattr__(m, "potential", type(m.potential)(0.0, 1.0, 0.0))
    with pytest.raises(ConfigError):
        default_c0(m)


class TestClassicalSav:
    def test_two_solves_per_step(self, ac):
        s = sav_initial_state(ac, _phi0(ac))
        for _ in range(3):
            s = sav_step(s, ac, 0.1)
        assert s.solves == 6 and s.step_index == 3

    def test_modified_energy_decays(self, ac):
        s = sav_initial_state(ac, _phi0(ac))
        e = [sav_modified_energy(ac, s)]
        for _ in range(20):
            s = sav_step(s, ac, 0.5)
            e.append(sav_modified_energy(ac, s))
        assert all(b <= a + 1e-13 for a, b in zip(e, e[1:]))

    def test_r_tracks_energy(self, ac):
        s = sav_initial_state(ac, _phi0(ac))
        assert s.r == pytest.approx(math.sqrt(ac.potential.integral(_phi0(ac), ac.grid.cell_area) + 1.0))
        for _ in range(100):
            s = sav_step(s, ac, 0.01)
        e1 = ac.potential.integral(s.phi, ac.grid.cell_area)
        assert s.r == pytest.approx(math.sqrt(e1 + s.c0), rel=1e-3)

    def test_rejects_bad_c0(self, ac):
        with pytest.raises(NumericalError):
            sav_initial_state(ac, _phi0(ac), c0=-1e3)

    def test_rejects_bad_dt(self, ac):
        with pytest.raises(ConfigError):
            sav_step(sav_initial_state(ac, _phi0(ac)), ac, 0.0)


class TestNewSav:
    def test_one_solve_per_step(self, ac):
        s = new_sav_initial_state(ac, _phi0(ac))
        for _ in range(4):
            s = new_sav_step(s, ac, 0.1)
        assert s.solves == 4

    def test_big_r_decays_and_xi_near_one(self, ac):
        s = new_sav_initial_state(ac, _phi0(ac))
        rs = [s.big_r]
        for _ in range(50):
            s = new_sav_step(s, ac, 0.05)
            rs.append(s.big_r)
        assert all(b <= a for a, b in zip(rs, rs[1:]))
        assert abs(s.xi - 1) < 0.05

    def test_custom_theta(self, ac):
        s = new_sav_initial_state(ac, _phi0(ac), theta_rule=lambda dt: 1.0)
        semi = semi_implicit_step(_phi0(ac), ac, 0.1)
        # theta = 1 leaves the semi-implicit solution untouched
        np.testing.assert_allclose(new_sav_step(s, ac, 0.1).phi, semi, atol=1e-15)


class TestSemiImplicit:
    def test_linear_mode(self, grid16):
        x, _ = grid16.mesh
        m = linear_model(grid16, DiagonalSymbol(grid16, grid16.k2), identity_symbol(grid16))
        np.testing.assert_allclose(semi_implicit_step(np.cos(x), m, 0.5), np.cos(x) / 1.5, atol=1e-15)

    def test_mass_conserved(self, rng):
        m = cahn_hilliard(make_grid(16, 16, TWO_PI, TWO_PI), 0.1, 1.0)
        phi = 0.3 * rng.uniform(-1, 1, (16, 16))
        mean = phi.mean()
        for _ in range(20):
            phi = semi_implicit_step(phi, m, 0.1)
        assert abs(phi.mean() - mean) < 1e-15

    def test_rejects_bad_dt(self, ac):
        with pytest.raises(ConfigError):
            semi_implicit_step(_phi0(ac), ac, -1.0)


def _gaps(ac, dt, t_end=2.0):
    phi0 = _phi0(ac)
    s, ns_, semi = sav_initial_state(ac, phi0), new_sav_initial_state(ac, phi0), phi0
    for _ in range(round(t_end / dt)):
        s = sav_step(s, ac, dt)
        ns_ = new_sav_step(ns_, ac, dt)
        semi = semi_implicit_step(semi, ac, dt)
    np.testing.assert_allclose(forward(ac.grid, s.phi), s.phi_hat, atol=1e-12)
    return np.max(np.abs(s.phi - semi)), np.max(np.abs(ns_.phi - semi))


def test_first_order_baselines_agree(ac):
    # all three are first-order consistent, so pairwise gaps shrink linearly
    coarse, fine = _gaps(ac, 0.05), _gaps(ac, 0.025)
    for c, f in zip(coarse, fine):
        assert math.log2(c / f) == pytest.approx(1.0, abs=0.1)
