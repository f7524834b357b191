"""First-order ESI-SAV integrator for 2D incompressible Navier-Stokes on a periodic box.

The pressure is eliminated by the spectral Leray projector ``P``; per mode

    (1 + dt nu |k|^2) u_hat^{n+1} = u_hat^n - dt xi^{n+1} P[(u^n . grad) u^n]_hat

with ``log R^{n+1} = log R^n - log1p(dt nu ||grad u^n||^2 / C)`` and
``xi^{n+1} = exp(log R^{n+1} - E(u^n)/C)``, ``E(u) = 1/2 int |u|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .spectral import Grid, check_field, forward, inverse, spectral_inner
from .steppers import update_log_r, xi_value


@dataclass(frozen=True)
class VelocityField:
    ux: np.ndarray
    uy: np.ndarray
    grid: Grid

    def __post_init__(self):
        check_field(self.grid, self.ux)
        check_field(self.grid, self.uy)


@dataclass(frozen=True)
class NsState:
    u: VelocityField
    log_r: float
    nu: float
    scale_c: float
    t: float = 0.0
    step_index: int = 0
    xi: float = 1.0
    solves: int = 0


def _hats(u: VelocityField):
    return forward(u.grid, u.ux), forward(u.grid, u.uy)


def _project_hats(grid, uxh, uyh):
    kx, ky = grid.derivative_wavenumbers
    k2 = kx * kx + ky * ky
    safe = np.where(k2 > 0, k2, 1.0)
    div = (kx * uxh + ky * uyh) / safe
    div = np.where(k2 > 0, div, 0.0)
    return uxh - kx * div, uyh - ky * div


def leray_project(u: VelocityField) -> VelocityField:
    """Remove the gradient part: ``u_hat -= k (k . u_hat) / |k|^2`` for ``k != 0``."""
    grid = u.grid
    uxh, uyh = _project_hats(grid, *_hats(u))
    return VelocityField(inverse(grid, uxh), inverse(grid, uyh), grid)


def divergence(u: VelocityField) -> np.ndarray:
    grid = u.grid
    kx, ky = grid.derivative_wavenumbers
    uxh, uyh = _hats(u)
    return inverse(grid, 1j * (kx * uxh + ky * uyh))


def max_divergence(u: VelocityField) -> float:
    return float(np.max(np.abs(divergence(u))))


def _convective_hats(grid, uxh, uyh, dealias_on):
    kx, ky = grid.derivative_wavenumbers
    if dealias_on:
        mask = grid.dealias_mask
        uxh, uyh = uxh * mask, uyh * mask
    ux, uy = inverse(grid, uxh), inverse(grid, uyh)
    dxux, dyux = inverse(grid, 1j * kx * uxh), inverse(grid, 1j * ky * uxh)
    dxuy, dyuy = inverse(grid, 1j * kx * uyh), inverse(grid, 1j * ky * uyh)
    nxh = forward(grid, ux * dxux + uy * dyux)
    nyh = forward(grid, ux * dxuy + uy * dyuy)
    if dealias_on:
        nxh, nyh = nxh * mask, nyh * mask
    return nxh, nyh


def convective_term(u: VelocityField, dealias_on: bool = True) -> VelocityField:
    """``(u . grad) u`` with spectral derivatives and physical-space products."""
    grid = u.grid
    nxh, nyh = _convective_hats(grid, *_hats(u), dealias_on)
    return VelocityField(inverse(grid, nxh), inverse(grid, nyh), grid)


def kinetic_energy(u: VelocityField) -> float:
    """``1/2 int |u|^2``."""
    uxh, uyh = _hats(u)
    return 0.5 * (spectral_inner(u.grid, uxh) + spectral_inner(u.grid, uyh))


def _gradient_norm(grid, uxh, uyh):
    return spectral_inner(grid, uxh, grid.k2_half) + spectral_inner(grid, uyh, grid.k2_half)


def pressure_diagnostic(u: VelocityField, dealias_on: bool = True) -> np.ndarray:
    """Zero-mean solution of ``Lap p = -div((u . grad) u)``."""
    grid = u.grid
    kx, ky = grid.derivative_wavenumbers
    nxh, nyh = _convective_hats(grid, *_hats(u), dealias_on)
    div_hat = 1j * (kx * nxh + ky * nyh)
    k2 = grid.k2_half
    p_hat = np.where(k2 > 0, div_hat / np.where(k2 > 0, k2, 1.0), 0.0)
    return inverse(grid, p_hat)


def taylor_green(grid: Grid, nu: float, t: float = 0.0) -> VelocityField:
    """``u = (cos x sin y, -sin x cos y) exp(-2 nu t)`` on ``[0, 2pi]^2``."""
    if not (np.isclose(grid.lx, 2 * np.pi) and np.isclose(grid.ly, 2 * np.pi)):
        raise ConfigError("Taylor-Green flow needs a [0, 2pi]^2 grid")
    x, y = grid.mesh
    decay = math.exp(-2.0 * nu * t)
    return VelocityField(np.cos(x) * np.sin(y) * decay, -np.sin(x) * np.cos(y) * decay, grid)


def ns_initial_state(u0: VelocityField, nu: float, scale_c: float | None = None) -> NsState:
    """Project ``u0`` and set ``log R^0 = E(u0)/C`` (``C`` defaults to the box area)."""
    if not (np.isfinite(nu) and nu > 0):
        raise ConfigError(f"nu={nu!r}: must be positive")
    c = float(u0.grid.area if scale_c is None else scale_c)
    if not c > 0:
        raise ConfigError(f"scale_c={scale_c!r}: must be positive")
    u = leray_project(u0)
    return NsState(u, kinetic_energy(u) / c, float(nu), c)


def ns_step(state: NsState, dt: float, dealias_on: bool = True) -> NsState:
    """One first-order ESI-SAV Navier-Stokes step."""
    if not dt > 0:
        raise ConfigError(f"dt={dt!r}: must be positive")
    u = state.u
    grid = u.grid
    uxh, uyh = _hats(u)
    c = state.scale_c
    d = state.nu * _gradient_norm(grid, uxh, uyh) / c
    log_r = update_log_r(state.log_r, dt, d)
    e_scaled = 0.5 * (spectral_inner(grid, uxh) + spectral_inner(grid, uyh)) / c
    xi = xi_value(log_r, e_scaled)
    nxh, nyh = _project_hats(grid, *_convective_hats(grid, uxh, uyh, dealias_on))
    denom = 1.0 + dt * state.nu * grid.k2_half
    new_uxh = (uxh - dt * xi * nxh) / denom
    new_uyh = (uyh - dt * xi * nyh) / denom
    new = VelocityField(inverse(grid, new_uxh), inverse(grid, new_uyh), grid)
    if not (np.all(np.isfinite(new.ux)) and np.all(np.isfinite(new.uy)) and math.isfinite(log_r)):
        raise NumericalError("Navier-Stokes step produced NaN or Inf")
    return NsState(new, log_r, state.nu, c, state.t + dt, state.step_index + 1, xi, state.solves + 1)


def ns_observables(state: NsState) -> dict:
    return {
        "t": state.t,
        "kinetic_energy": kinetic_energy(state.u),
        "log_r": state.log_r,
        "xi": state.xi,
        "max_div": max_divergence(state.u),
    }
