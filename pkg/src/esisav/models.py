"""Dissipative phase-field models as (L, G, F) triples on a grid.

Every model is a gradient flow ``dphi/dt = -G mu`` with
``mu = L phi + F'(phi)`` and energy ``E = 1/2 (phi, L phi) + int F(phi)``.
``L`` and ``G`` are diagonal Fourier symbols and ``F`` is a quartic

    F(phi) = q/4 phi^4 - a/2 phi^2 + c,

which covers the double well (Allen-Cahn), its beta-shifted form
(Cahn-Hilliard) and the Swift-Hohenberg bulk term (phase field crystal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError
from .spectral import (
    DiagonalSymbol,
    Grid,
    check_field,
    forward,
    identity_symbol,
    inverse,
    spectral_inner,
)


@dataclass(frozen=True)
class QuarticPotential:
    """``F(phi) = q/4 phi^4 - a/2 phi^2 + c``."""

    q: float = 1.0
    a: float = 1.0
    c: float = 0.0

    def density(self, phi):
        p2 = np.asarray(phi, dtype=np.float64) ** 2
        return p2 * (0.25 * self.q * p2 - 0.5 * self.a) + self.c

    def derivative(self, phi):
        return kernels.cubic_derivative(np.ascontiguousarray(phi, dtype=np.float64), self.q, self.a)

    def integral(self, phi, cell_area):
        """Quadrature of ``F(phi)``: ``cell_area * sum F(phi_ij)``."""
        return cell_area * kernels.quartic_sum(np.ascontiguousarray(phi, dtype=np.float64), self.q, self.a, self.c)

    @property
    def minimum(self):
        """Pointwise lower bound of ``F`` (``-inf`` only if ``q < 0``)."""
        if self.q > 0:
            return self.c - self.a * self.a / (4.0 * self.q) if self.a > 0 else self.c
        if self.q == 0:
            return self.c if self.a <= 0 else -np.inf
        return -np.inf


@dataclass(frozen=True)
class ModelSpec:
    """An immutable dissipative model definition.

    ``gl_half`` caches the product symbol of ``G*L`` on the half layout since
    every implicit solve needs it.
    """

    name: str
    grid: Grid
    l_symbol: DiagonalSymbol
    g_symbol: DiagonalSymbol
    potential: QuarticPotential
    epsilon: float
    beta: float
    scale_c: float

    def __post_init__(self):
        if self.l_symbol.grid != self.grid or self.g_symbol.grid != self.grid:
            raise ConfigError("model symbols must live on the model grid")
        if not self.g_symbol.is_psd:
            raise ConfigError("mobility G must be positive semi-definite")
        if not (np.isfinite(self.scale_c) and self.scale_c > 0):
            raise ConfigError(f"scale_c={self.scale_c!r}: must be positive")
        gl = self.g_symbol.half * self.l_symbol.half
        gl.setflags(write=False)
        object.__setattr__(self, "gl_half", gl)

    def f_density(self, phi):
        return self.potential.density(phi)

    def f_prime(self, phi):
        return self.potential.derivative(phi)

    @property
    def conserves_mass(self):
        """True when ``G`` annihilates the mean mode (H^-1 flows)."""
        return bool(self.g_symbol.table[0, 0] == 0.0)


def _check_epsilon(epsilon):
    if not (np.isfinite(epsilon) and epsilon > 0):
        raise ConfigError(f"epsilon={epsilon!r}: must be positive")


def allen_cahn(grid: Grid, epsilon: float, scale_c: float = 1000.0) -> ModelSpec:
    """L^2 flow of ``int eps^2/2 |grad phi|^2 + 1/4 (phi^2 - 1)^2``."""
    _check_epsilon(epsilon)
    return ModelSpec(
        name="allen_cahn",
        grid=grid,
        l_symbol=DiagonalSymbol(grid, epsilon**2 * grid.k2),
        g_symbol=identity_symbol(grid),
        potential=QuarticPotential(1.0, 1.0, 0.25),
        epsilon=float(epsilon),
        beta=0.0,
        scale_c=float(scale_c),
    )


def cahn_hilliard(grid: Grid, epsilon: float, beta: float = 0.0, scale_c: float | None = None) -> ModelSpec:
    """Stabilized Cahn-Hilliard: ``L = -eps^2 Lap + beta``, ``F = 1/4 (phi^2 - 1 - beta)^2``."""
    _check_epsilon(epsilon)
    if not (np.isfinite(beta) and beta >= 0):
        raise ConfigError(f"beta={beta!r}: must be non-negative")
    shift = 1.0 + beta
    return ModelSpec(
        name="cahn_hilliard",
        grid=grid,
        l_symbol=DiagonalSymbol(grid, epsilon**2 * grid.k2 + beta),
        g_symbol=DiagonalSymbol(grid, grid.k2),
        potential=QuarticPotential(1.0, shift, 0.25 * shift * shift),
        epsilon=float(epsilon),
        beta=float(beta),
        scale_c=float(grid.area if scale_c is None else scale_c),
    )


def pfc(grid: Grid, epsilon: float, scale_c: float | None = None) -> ModelSpec:
    """Phase field crystal, ``(1 + Lap)^2`` implicit and ``-eps phi`` in ``F'``."""
    _check_epsilon(epsilon)
    return ModelSpec(
        name="pfc",
        grid=grid,
        l_symbol=DiagonalSymbol(grid, (1.0 - grid.k2) ** 2),
        g_symbol=DiagonalSymbol(grid, grid.k2),
        potential=QuarticPotential(1.0, float(epsilon), 0.0),
        epsilon=float(epsilon),
        beta=0.0,
        scale_c=float(grid.area if scale_c is None else scale_c),
    )


def linear_model(grid: Grid, l_symbol: DiagonalSymbol, g_symbol: DiagonalSymbol, scale_c: float = 1.0) -> ModelSpec:
    """Purely quadratic energy (``F == 0``); the flow is linear and exactly solvable per mode."""
    return ModelSpec(
        name="linear",
        grid=grid,
        l_symbol=l_symbol,
        g_symbol=g_symbol,
        potential=QuarticPotential(0.0, 0.0, 0.0),
        epsilon=1.0,
        beta=0.0,
        scale_c=float(scale_c),
    )


MODEL_FACTORIES = {
    "allen_cahn": allen_cahn,
    "cahn_hilliard": cahn_hilliard,
    "pfc": pfc,
}


def energy_from_spectrum(model: ModelSpec, phi, phi_hat) -> float:
    """``E(phi)`` when the caller already holds ``phi_hat = forward(phi)``."""
    grid = model.grid
    quad = 0.5 * spectral_inner(grid, phi_hat, model.l_symbol.half)
    return quad + model.potential.integral(phi, grid.cell_area)


def energy(model: ModelSpec, phi) -> float:
    """``1/2 (phi, L phi) + int F(phi)`` (unscaled)."""
    phi = check_field(model.grid, phi)
    return energy_from_spectrum(model, phi, forward(model.grid, phi))


def nonlinear_energy(model: ModelSpec, phi) -> float:
    """``E_1(phi) = int F(phi)``."""
    phi = check_field(model.grid, phi)
    return model.potential.integral(phi, model.grid.cell_area)


def chemical_potential(model: ModelSpec, phi) -> np.ndarray:
    """``mu = L phi + F'(phi)``."""
    grid = model.grid
    phi = check_field(grid, phi)
    return inverse(grid, model.l_symbol.half * forward(grid, phi)) + model.f_prime(phi)
