"""First-order reference integrators: classical SAV, theta-relaxed SAV, semi-implicit.

All three share the implicit operator ``I + dt*G*L`` with the ESI-SAV
first-order scheme, so differences in accuracy come only from how the
nonlinear term is scaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import ConfigError, NumericalError
from .models import ModelSpec, energy_from_spectrum
from .spectral import check_field, check_invertible, forward, inner_product, inverse, spectral_inner


def default_c0(model: ModelSpec) -> float:
    """Shift making ``E_1 + c0 > 0``: ``1 + |Omega| * max(0, -min F)``."""
    fmin = model.potential.minimum
    if not math.isfinite(fmin):
        raise ConfigError("potential is unbounded below; classical SAV needs an explicit c0")
    return 1.0 + model.grid.area * max(0.0, -fmin)


def theta_one_plus_dt(dt):
    return 1.0 + dt


@dataclass(frozen=True)
class SavState:
    """Classical SAV state with ``r = sqrt(E_1 + c0)``."""

    phi: np.ndarray
    phi_hat: np.ndarray
    r: float
    c0: float
    t: float = 0.0
    step_index: int = 0
    solves: int = 0


@dataclass(frozen=True)
class NewSavState:
    """Theta-relaxed SAV state, ``R ~ E + c0``."""

    phi: np.ndarray
    phi_hat: np.ndarray
    big_r: float
    c0: float
    theta_rule: Callable[[float], float] = theta_one_plus_dt
    t: float = 0.0
    step_index: int = 0
    xi: float = 1.0
    solves: int = 0


def _prepare(model, phi0):
    phi0 = np.ascontiguousarray(check_field(model.grid, phi0), dtype=np.float64).copy()
    return phi0, forward(model.grid, phi0)


def _implicit(model, dt):
    denom = 1.0 + dt * model.gl_half
    check_invertible(model.grid, denom)
    return denom


def _finite(phi, *scalars):
    if not np.all(np.isfinite(phi)) or not all(math.isfinite(s) for s in scalars):
        raise NumericalError("baseline produced NaN or Inf")


def sav_initial_state(model: ModelSpec, phi0, c0: float | None = None) -> SavState:
    phi0, phi0_hat = _prepare(model, phi0)
    c0 = default_c0(model) if c0 is None else float(c0)
    e1 = model.potential.integral(phi0, model.grid.cell_area)
    if e1 + c0 <= 0:
        raise NumericalError(f"E_1 + c0 = {e1 + c0:.4g} <= 0; raise c0")
    return SavState(phi0, phi0_hat, math.sqrt(e1 + c0), c0)


def sav_step(state: SavState, model: ModelSpec, dt: float) -> SavState:
    """First-order classical SAV step via the two-solve splitting.

    ``phi^{n+1} = phi_1 + r^{n+1} phi_2`` with ``(I + dt GL) phi_1 = phi^n``
    and ``(I + dt GL) phi_2 = -dt G b^n``; ``r^{n+1}`` then closes
    ``r^{n+1} - r^n = 1/2 (b^n, phi^{n+1} - phi^n)``.
    """
    if dt <= 0:
        raise ConfigError(f"dt={dt!r}: must be positive")
    grid = model.grid
    phi, phi_hat = state.phi, state.phi_hat
    e1 = model.potential.integral(phi, grid.cell_area)
    if e1 + state.c0 <= 0:
        raise NumericalError(f"E_1 + c0 = {e1 + state.c0:.4g} <= 0; raise c0")
    b = model.f_prime(phi) / math.sqrt(e1 + state.c0)
    b_hat = forward(grid, b)
    denom = _implicit(model, dt)
    phi1_hat = phi_hat / denom
    phi2_hat = kernels.implicit_update(np.zeros_like(b_hat), b_hat, model.g_symbol.half, -dt, denom)
    phi1, phi2 = inverse(grid, phi1_hat), inverse(grid, phi2_hat)
    r_new = (state.r + 0.5 * inner_product(grid, b, phi1 - phi)) / (1.0 - 0.5 * inner_product(grid, b, phi2))
    new_hat = phi1_hat + r_new * phi2_hat
    new = phi1 + r_new * phi2
    _finite(new, r_new)
    return SavState(new, new_hat, r_new, state.c0, state.t + dt, state.step_index + 1, state.solves + 2)


def sav_modified_energy(model: ModelSpec, state: SavState) -> float:
    """``1/2 (L phi, phi) + r^2``, the classical SAV Lyapunov functional."""
    return 0.5 * spectral_inner(model.grid, state.phi_hat, model.l_symbol.half) + state.r**2


def new_sav_initial_state(model: ModelSpec, phi0, c0: float | None = None,
                          theta_rule: Callable[[float], float] = theta_one_plus_dt) -> NewSavState:
    phi0, phi0_hat = _prepare(model, phi0)
    c0 = default_c0(model) if c0 is None else float(c0)
    e = energy_from_spectrum(model, phi0, phi0_hat)
    if e + c0 <= 0:
        raise NumericalError(f"E + c0 = {e + c0:.4g} <= 0; raise c0")
    return NewSavState(phi0, phi0_hat, e + c0, c0, theta_rule)


def new_sav_step(state: NewSavState, model: ModelSpec, dt: float) -> NewSavState:
    """Theta-relaxed SAV step with one constant-coefficient solve.

    The semi-implicit solution ``phi_bar`` of ``(I + dt GL) phi_bar =
    phi^n - dt G F'(phi^n)`` supplies ``mu_bar`` and ``E(phi_bar)``; then
    ``R^{n+1} = R^n / (1 + dt (G mu_bar, mu_bar) / (E(phi_bar) + c0))``,
    ``xi = R^{n+1} / (E(phi_bar) + c0)`` and
    ``phi^{n+1} = [theta + (1 - theta) xi] phi_bar``.
    """
    if dt <= 0:
        raise ConfigError(f"dt={dt!r}: must be positive")
    grid = model.grid
    fp_hat = forward(grid, model.f_prime(state.phi))
    denom = _implicit(model, dt)
    bar_hat = kernels.implicit_update(state.phi_hat, fp_hat, model.g_symbol.half, -dt, denom)
    bar = inverse(grid, bar_hat)
    e_bar = energy_from_spectrum(model, bar, bar_hat) + state.c0
    if e_bar <= 0:
        raise NumericalError(f"E(phi_bar) + c0 = {e_bar:.4g} <= 0; raise c0")
    mu_hat = model.l_symbol.half * bar_hat + forward(grid, model.f_prime(bar))
    diss = spectral_inner(grid, mu_hat, model.g_symbol.half)
    big_r = state.big_r / (1.0 + dt * diss / e_bar)
    xi = big_r / e_bar
    theta = state.theta_rule(dt)
    mult = theta + (1.0 - theta) * xi
    new, new_hat = mult * bar, mult * bar_hat
    _finite(new, big_r)
    return NewSavState(new, new_hat, big_r, state.c0, state.theta_rule, state.t + dt,
                       state.step_index + 1, xi, state.solves + 1)


def semi_implicit_step(phi, model: ModelSpec, dt: float) -> np.ndarray:
    """``(I + dt GL) phi^{n+1} = phi^n - dt G F'(phi^n)``."""
    if dt <= 0:
        raise ConfigError(f"dt={dt!r}: must be positive")
    grid = model.grid
    phi = np.ascontiguousarray(check_field(grid, phi), dtype=np.float64)
    fp_hat = forward(grid, model.f_prime(phi))
    new_hat = kernels.implicit_update(forward(grid, phi), fp_hat, model.g_symbol.half, -dt, _implicit(model, dt))
    new = inverse(grid, new_hat)
    _finite(new)
    return new
