"""Exponential semi-implicit SAV integrators: first order, Crank-Nicolson, BDF2-4.

The auxiliary variable ``R = exp(E/C)`` is carried as ``log R``. Each step

1. builds an explicit predictor ``phi*`` and ``mu_bar = L phi* + F'(phi*)``,
2. updates ``log R -= log1p(dt * (G mu_bar, mu_bar) / C)``,
3. forms ``xi = exp(log R - E(phi*)/C)`` and the weight ``V_k(xi)``,
4. does one diagonal solve for ``phi^{n+1}`` with ``V_k(xi) F'(phi*)`` explicit.

Steps are pure functions ``state -> state``. ``EsiSavState.solves`` counts the
constant-coefficient solves performed so far.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import kernels
from .errors import ConfigError, InsufficientHistoryError, NumericalError, ScaleOverflowError
from .models import ModelSpec, energy_from_spectrum
from .spectral import check_field, check_invertible, forward, inverse, spectral_inner


class SchemeKind(enum.Enum):
    FIRST_ORDER = "first_order"
    CN = "cn"
    BDF2 = "bdf2"
    BDF3 = "bdf3"
    BDF4 = "bdf4"

    @property
    def order(self) -> int:
        return _ORDERS[self]

    @classmethod
    def parse(cls, name) -> "SchemeKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"first": "first_order", "esi_sav": "first_order", "esisav": "first_order",
                   "be": "first_order", "crank_nicolson": "cn"}
        key = aliases.get(key, key)
        for kind in cls:
            if kind.value == key:
                return kind
        raise ConfigError(f"unknown ESI-SAV scheme {name!r}")


_ORDERS = {
    SchemeKind.FIRST_ORDER: 1,
    SchemeKind.CN: 2,
    SchemeKind.BDF2: 2,
    SchemeKind.BDF3: 3,
    SchemeKind.BDF4: 4,
}

# leading coefficient and history weights (newest first)
BDF_COEFFS = {
    2: (1.5, (2.0, -0.5)),
    3: (11.0 / 6.0, (3.0, -1.5, 1.0 / 3.0)),
    4: (25.0 / 12.0, (4.0, -3.0, 4.0 / 3.0, -0.25)),
}

EXTRAPOLATION = {
    1: (1.0,),
    2: (2.0, -1.0),
    3: (3.0, -3.0, 1.0),
    4: (4.0, -6.0, 4.0, -1.0),
}

CN_PREDICTOR = (1.5, -0.5)


@dataclass(frozen=True)
class EsiSavState:
    """Solution history (newest first) in physical and spectral form, plus ``log R``."""

    history: tuple
    history_hat: tuple
    log_r: float
    dt: float
    step_index: int = 0
    t: float = 0.0
    xi: float = 1.0
    solves: int = 0

    @property
    def phi(self) -> np.ndarray:
        return self.history[0]

    @property
    def phi_hat(self) -> np.ndarray:
        return self.history_hat[0]


def v_family(k: int, xi: float) -> float:
    """Order-``k`` weight with ``1 - V_k(xi) = (1 - xi)^k``."""
    if k == 1:
        return xi
    if k == 2:
        return xi * (2.0 - xi)
    if k == 3:
        return xi * (3.0 - 3.0 * xi + xi * xi)
    if k == 4:
        return xi * (2.0 - xi) * (2.0 - 2.0 * xi + xi * xi)
    raise ConfigError(f"V(xi) is defined for k in 1..4, got {k!r}")


def update_log_r(log_r: float, dt: float, d: float) -> float:
    """``log R^{n+1} = log R^n - log1p(dt * d)`` with ``d = (G mu, mu)/C >= 0``."""
    if d < 0:
        raise NumericalError(f"negative dissipation d={d!r}; mobility symbol is broken")
    if dt <= 0:
        raise ConfigError(f"dt={dt!r}: must be positive")
    return log_r - math.log1p(dt * d)


def xi_value(log_r_next: float, scaled_energy: float) -> float:
    """``xi = R / exp(E/C)`` evaluated in log space."""
    if not (math.isfinite(log_r_next) and math.isfinite(scaled_energy)):
        raise NumericalError("log R or E/C is not finite")
    try:
        xi = math.exp(log_r_next - scaled_energy)
    except OverflowError:
        raise ScaleOverflowError(
            f"xi = exp({log_r_next - scaled_energy:.4g}) overflows; increase scale_c"
        ) from None
    return xi


def initial_state(model: ModelSpec, phi0, dt: float, t0: float = 0.0) -> EsiSavState:
    """State at ``t0`` with ``log R^0 = E(phi^0)/C``."""
    if not (math.isfinite(dt) and dt > 0):
        raise ConfigError(f"dt={dt!r}: must be positive")
    phi0 = np.ascontiguousarray(check_field(model.grid, phi0), dtype=np.float64).copy()
    _check_finite(phi0)
    phi0_hat = forward(model.grid, phi0)
    log_r = energy_from_spectrum(model, phi0, phi0_hat) / model.scale_c
    return EsiSavState((phi0,), (phi0_hat,), float(log_r), float(dt), 0, float(t0), 1.0, 0)


def _check_finite(phi):
    if not np.all(np.isfinite(phi)):
        raise NumericalError("solution contains NaN or Inf")


def _combine(weights, arrays):
    out = weights[0] * arrays[0]
    for w, a in zip(weights[1:], arrays[1:]):
        out = out + w * a
    return out


def _nonlinear_hat(model, phi):
    return forward(model.grid, model.f_prime(phi))


def _scaled_dissipation(model, phi_hat, fp_hat):
    mu_hat = model.l_symbol.half * phi_hat + fp_hat
    return spectral_inner(model.grid, mu_hat, model.g_symbol.half) / model.scale_c


def _scaled_energy(model, phi, phi_hat):
    return energy_from_spectrum(model, phi, phi_hat) / model.scale_c


def _solve(model, base_hat, fp_hat, coef, lead, dt):
    """``(lead*I + dt*G*L)^{-1} (base + coef * G fp)`` in spectral space."""
    denom = lead + dt * model.gl_half
    check_invertible(model.grid, denom)
    out_hat = kernels.implicit_update(
        np.ascontiguousarray(base_hat), np.ascontiguousarray(fp_hat), model.g_symbol.half, coef, denom
    )
    return out_hat, inverse(model.grid, out_hat)


def _esi_scalars(model, state, pred, pred_hat, fp_hat, order):
    """log R update, xi and V(xi) from a predictor."""
    d = _scaled_dissipation(model, pred_hat, fp_hat)
    log_r = update_log_r(state.log_r, state.dt, d)
    xi = xi_value(log_r, _scaled_energy(model, pred, pred_hat))
    return log_r, xi, v_family(order, xi)


def _advance(state, phi, phi_hat, keep, log_r, xi, solves):
    _check_finite(phi)
    if not math.isfinite(log_r):
        raise NumericalError("log R is not finite")
    return EsiSavState(
        history=(phi,) + state.history[: keep - 1],
        history_hat=(phi_hat,) + state.history_hat[: keep - 1],
        log_r=log_r,
        dt=state.dt,
        step_index=state.step_index + 1,
        t=state.t + state.dt,
        xi=xi,
        solves=state.solves + solves,
    )


def step_first_order(state: EsiSavState, model: ModelSpec) -> EsiSavState:
    """Backward-Euler ESI-SAV step: ``(I + dt GL) phi^{n+1} = phi^n - dt xi G F'(phi^n)``."""
    if not state.history:
        raise InsufficientHistoryError("empty history")
    dt = state.dt
    phi, phi_hat = state.history[0], state.history_hat[0]
    fp_hat = _nonlinear_hat(model, phi)
    log_r, xi, w = _esi_scalars(model, state, phi, phi_hat, fp_hat, 1)
    new_hat, new = _solve(model, phi_hat, fp_hat, -dt * w, 1.0, dt)
    return _advance(state, new, new_hat, 1, log_r, xi, 1)


def step_cn(state: EsiSavState, model: ModelSpec, predictor=None) -> EsiSavState:
    """Crank-Nicolson ESI-SAV step with ``V = xi (2 - xi)``.

    ``predictor`` optionally supplies ``(phi*, phi*_hat)``; otherwise
    ``3/2 phi^n - 1/2 phi^{n-1}`` is used.
    """
    dt = state.dt
    if predictor is None:
        if len(state.history) < 2:
            raise InsufficientHistoryError("Crank-Nicolson needs two history levels (run startup first)")
        pred = _combine(CN_PREDICTOR, state.history[:2])
        pred_hat = _combine(CN_PREDICTOR, state.history_hat[:2])
    else:
        pred, pred_hat = predictor
    phi_hat = state.history_hat[0]
    fp_hat = _nonlinear_hat(model, pred)
    log_r, xi, w = _esi_scalars(model, state, pred, pred_hat, fp_hat, 2)
    base = (1.0 - 0.5 * dt * model.gl_half) * phi_hat
    new_hat, new = _solve(model, base, fp_hat, -dt * w, 1.0, 0.5 * dt)
    return _advance(state, new, new_hat, 2, log_r, xi, 1)


def step_bdfk(state: EsiSavState, model: ModelSpec, k: int) -> EsiSavState:
    """BDF``k`` ESI-SAV step (``k`` in 2..4) with order-``k`` extrapolated predictor."""
    if k not in BDF_COEFFS:
        raise ConfigError(f"BDF order must be 2, 3 or 4, got {k!r}")
    if len(state.history) < k:
        raise InsufficientHistoryError(f"BDF{k} needs {k} history levels, have {len(state.history)}")
    dt = state.dt
    lead, weights = BDF_COEFFS[k]
    ext = EXTRAPOLATION[k]
    pred = _combine(ext, state.history[:k])
    pred_hat = _combine(ext, state.history_hat[:k])
    fp_hat = _nonlinear_hat(model, pred)
    log_r, xi, w = _esi_scalars(model, state, pred, pred_hat, fp_hat, k)
    base = _combine(weights, state.history_hat[:k])
    new_hat, new = _solve(model, base, fp_hat, -dt * w, lead, dt)
    return _advance(state, new, new_hat, k, log_r, xi, 1)


def startup_substeps(dt: float, k: int) -> int:
    """Number of Crank-Nicolson substeps per level so the substep is ``<= dt^(k/2)``."""
    target = dt ** (0.5 * k)
    if target >= dt:
        return 1
    return max(1, math.ceil(dt / target - 1e-9))


def startup_levels(state: EsiSavState, model: ModelSpec, target) -> list:
    """Run the startup of ``target`` from ``step_index == 0``; one state per new level."""
    target = SchemeKind.parse(target)
    if state.step_index != 0 or len(state.history) != 1:
        raise ConfigError("startup requires a fresh state (step_index == 0)")
    dt = state.dt
    phi0, phi0_hat = state.history[0], state.history_hat[0]
    fp0_hat = _nonlinear_hat(model, phi0)

    if target is SchemeKind.FIRST_ORDER:
        # mu_bar from the semi-implicit guess phi_bar^1 rather than phi^0
        bar_hat, bar = _solve(model, phi0_hat, fp0_hat, -dt, 1.0, dt)
        d = _scaled_dissipation(model, bar_hat, _nonlinear_hat(model, bar))
        log_r = update_log_r(state.log_r, dt, d)
        xi = xi_value(log_r, _scaled_energy(model, phi0, phi0_hat))
        new_hat, new = _solve(model, phi0_hat, fp0_hat, -dt * xi, 1.0, dt)
        return [_advance(state, new, new_hat, 1, log_r, xi, 2)]

    if target is SchemeKind.CN:
        half_hat, half = _solve(model, phi0_hat, fp0_hat, -0.5 * dt, 1.0, 0.5 * dt)
        first = step_cn(state, model, predictor=(half, half_hat))
        return [replace(first, solves=first.solves + 1)]

    k = target.order
    m = startup_substeps(dt, k)
    sub = replace(state, dt=dt / m)
    sub = startup_levels(sub, model, SchemeKind.CN)[0]
    levels = []
    for n in range(1, m * (k - 1) + 1):
        if n > 1:
            sub = step_cn(sub, model)
        if n % m == 0:
            levels.append(sub)
    out = []
    history, history_hat = (phi0,), (phi0_hat,)
    for j, lev in enumerate(levels, start=1):
        history = (lev.phi,) + history
        history_hat = (lev.phi_hat,) + history_hat
        out.append(EsiSavState(history, history_hat, lev.log_r, dt, j, state.t + j * dt,
                               lev.xi, lev.solves))
    return out


def startup(state: EsiSavState, model: ModelSpec, target) -> EsiSavState:
    """Startup procedure; returns the state after the last startup level."""
    return startup_levels(state, model, target)[-1]


def step(state: EsiSavState, model: ModelSpec, scheme) -> EsiSavState:
    """One regular (post-startup) step of ``scheme``."""
    scheme = SchemeKind.parse(scheme)
    if scheme is SchemeKind.FIRST_ORDER:
        return step_first_order(state, model)
    if scheme is SchemeKind.CN:
        return step_cn(state, model)
    return step_bdfk(state, model, scheme.order)


def advance(state: EsiSavState, model: ModelSpec, scheme) -> list:
    """Next state(s): the startup levels at ``step_index == 0``, else one step."""
    if state.step_index == 0:
        return startup_levels(state, model, scheme)
    return [step(state, model, scheme)]


def startup_steps(scheme) -> int:
    """Number of levels produced by the startup of ``scheme``."""
    scheme = SchemeKind.parse(scheme)
    if scheme in (SchemeKind.FIRST_ORDER, SchemeKind.CN):
        return 1
    return scheme.order - 1


def observables(model: ModelSpec, state: EsiSavState, scheme) -> dict:
    """Series record ``t, energy, log_r, xi, v_xi, mass`` for one state."""
    scheme = SchemeKind.parse(scheme)
    grid = model.grid
    return {
        "t": state.t,
        "energy": energy_from_spectrum(model, state.phi, state.phi_hat),
        "log_r": state.log_r,
        "xi": state.xi,
        "v_xi": v_family(scheme.order, state.xi),
        "mass": float(state.phi_hat[0, 0].real) / grid.size,
    }


def integrate(model: ModelSpec, scheme, phi0, dt: float, n_steps: int,
              sink: Callable[[dict], None] | None = None) -> EsiSavState:
    """Run ``n_steps`` steps (startup included) and return the final state.

    ``sink`` receives :func:`observables` for every step (not for ``t = 0``).
    """
    scheme = SchemeKind.parse(scheme)
    if n_steps < startup_steps(scheme):
        raise ConfigError(f"{scheme.value} needs at least {startup_steps(scheme)} steps")
    state = initial_state(model, phi0, dt)
    while state.step_index < n_steps:
        for state in advance(state, model, scheme):
            if sink is not None:
                sink(observables(model, state, scheme))
    return state
