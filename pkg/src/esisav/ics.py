"""Named initial conditions for the phase-field experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .rng import rand_field
from .spectral import Grid


@dataclass(frozen=True)
class CrystalliteSpec:
    """A square patch filled with a rotated hexagonal density wave."""

    cx: float
    cy: float
    side: float = 40.0
    theta: float = 0.0
    phi_bar: float = 0.285
    amplitude: float = 0.446
    q: float = 0.66

    def validate(self, grid: Grid):
        if not (self.amplitude > 0 and self.q > 0 and self.side > 0):
            raise ConfigError("crystallite amplitude, q and side must be positive")
        h = 0.5 * self.side
        if not (h <= self.cx <= grid.lx - h and h <= self.cy <= grid.ly - h):
            raise ConfigError(f"crystallite patch at ({self.cx}, {self.cy}) leaves the domain")

    def profile(self, dx, dy):
        """Density at offsets ``(dx, dy)`` from the patch center."""
        s, c = math.sin(self.theta), math.cos(self.theta)
        xl = dx * s + dy * c
        yl = -dx * c + dy * s
        q3 = self.q / math.sqrt(3.0)
        return self.phi_bar + self.amplitude * (
            np.cos(q3 * yl) * np.cos(self.q * xl) - 0.5 * np.cos(2.0 * q3 * yl)
        )


DEFAULT_CRYSTALLITES = (
    CrystalliteSpec(150.0, 150.0, theta=math.pi / 4),
    CrystalliteSpec(250.0, 300.0, theta=0.0),
    CrystalliteSpec(300.0, 200.0, theta=-math.pi / 4),
)


def crystallites(grid: Grid, specs=DEFAULT_CRYSTALLITES, background=None, noise=0.0, seed=0):
    """Liquid background ``phi_bar`` with crystalline square patches.

    ``noise`` adds ``noise * Rand`` inside the patches.
    """
    specs = tuple(specs)
    if not specs:
        raise ConfigError("need at least one crystallite")
    base = specs[0].phi_bar if background is None else float(background)
    x, y = grid.mesh
    phi = np.full(grid.shape, base)
    rand = rand_field(seed, grid.shape) if noise else None
    for spec in specs:
        spec.validate(grid)
        dx, dy = x - spec.cx, y - spec.cy
        inside = (np.abs(dx) <= 0.5 * spec.side) & (np.abs(dy) <= 0.5 * spec.side)
        phi[inside] = spec.profile(dx[inside], dy[inside])
        if rand is not None:
            phi[inside] += noise * rand[inside]
    return phi


def _crystallite_specs(params):
    raw = params.get("crystallites")
    if raw is None:
        return DEFAULT_CRYSTALLITES
    shared = {k: params[k] for k in ("side", "phi_bar", "amplitude", "q") if k in params}
    specs = []
    for item in raw:
        item = dict(item)
        if "theta" in item:
            item["theta"] = float(item["theta"])
        specs.append(CrystalliteSpec(**{**shared, **item}))
    return specs


def preset_ic(name: str, grid: Grid, seed: int = 0, params: dict | None = None) -> np.ndarray:
    """Deterministic initial field for ``(name, grid, seed)``.

    ``ac_cos``: ``0.1 cos x cos y``; ``ch_random``: ``0.25 + 0.4 Rand``;
    ``pfc_random``: ``0.07 + 0.07 (Rand - mean Rand)``; ``pfc_crystallites``:
    three rotated patches on a liquid background; ``constant``: ``value``.
    """
    p = dict(params or {})
    x, y = grid.mesh
    if name == "ac_cos":
        return p.get("amplitude", 0.1) * np.cos(x) * np.cos(y)
    if name == "ch_random":
        return p.get("mean", 0.25) + p.get("amplitude", 0.4) * rand_field(seed, grid.shape)
    if name == "pfc_random":
        r = rand_field(seed, grid.shape)
        return p.get("mean", 0.07) + p.get("amplitude", 0.07) * (r - r.mean())
    if name == "pfc_crystallites":
        return crystallites(grid, _crystallite_specs(p), p.get("background"), p.get("noise", 0.0), seed)
    if name == "constant":
        return np.full(grid.shape, float(p.get("value", 0.0)))
    raise ConfigError(f"unknown initial-condition preset {name!r}")


PRESETS = ("ac_cos", "ch_random", "pfc_random", "pfc_crystallites", "constant")
