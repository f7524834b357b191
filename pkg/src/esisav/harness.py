"""Experiment runners: evolutions, convergence studies, scheme comparisons, Navier-Stokes."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import baselines, navier_stokes as ns
from .config import ESI_SCHEMES, RunConfig, canonical_scheme, scheme_order, steps_for
from .errors import ConfigError
from .ics import preset_ic
from .models import ModelSpec, allen_cahn, cahn_hilliard, energy_from_spectrum, pfc
from .spectral import Grid, forward
from . import steppers

SERIES_HEADER = ("t", "energy", "log_r", "xi", "v_xi", "mass")
NS_SERIES_HEADER = ("t", "kinetic_energy", "log_r", "xi", "max_div")


# ---------------------------------------------------------------- building blocks

def build_grid(cfg: RunConfig) -> Grid:
    g = cfg.grid
    return Grid(g.nx, g.ny, g.lx, g.ly)


def build_model(cfg: RunConfig, grid: Grid | None = None) -> ModelSpec:
    grid = build_grid(cfg) if grid is None else grid
    m = cfg.model
    if m.name == "allen_cahn":
        return allen_cahn(grid, m.epsilon) if m.scale_c is None else allen_cahn(grid, m.epsilon, m.scale_c)
    if m.name == "cahn_hilliard":
        return cahn_hilliard(grid, m.epsilon, m.beta, m.scale_c)
    if m.name == "pfc":
        return pfc(grid, m.epsilon, m.scale_c)
    raise ConfigError(f"model {m.name!r} is not a phase-field model")


def build_ic(cfg: RunConfig, grid: Grid) -> np.ndarray:
    return preset_ic(cfg.ic.preset, grid, cfg.seed, cfg.ic.params)


def fit_rates(dts, errors) -> list:
    """Pairwise rates ``log(e_i / e_{i+1}) / log(dt_i / dt_{i+1})``."""
    if len(dts) != len(errors):
        raise ConfigError(f"{len(dts)} time steps but {len(errors)} errors")
    rates = []
    for (d0, e0), (d1, e1) in zip(zip(dts, errors), zip(dts[1:], errors[1:])):
        if e0 > 0 and e1 > 0:
            rates.append(math.log(e0 / e1) / math.log(d0 / d1))
        else:
            rates.append(float("nan"))
    return rates


def one_minus_v(k: int, xi: float) -> float:
    """``1 - V_k(xi) = (1 - xi)^k`` evaluated without cancellation."""
    return (1.0 - xi) ** k


# ---------------------------------------------------------------- uniform runs

class SchemeRun:
    """Step-by-step driver with a common interface for every scheme.

    ``advance()`` returns the series records of the steps just taken (the
    multistep startup yields several at once).
    """

    def __init__(self, model: ModelSpec, scheme: str, phi0, dt: float, c0: float | None = None):
        self.model = model
        self.scheme = canonical_scheme(scheme)
        self.dt = float(dt)
        self.order = scheme_order(self.scheme)
        if self.scheme in ESI_SCHEMES:
            self.state = steppers.initial_state(model, phi0, dt)
        elif self.scheme == "sav":
            self.state = baselines.sav_initial_state(model, phi0, c0)
        elif self.scheme == "new_sav":
            self.state = baselines.new_sav_initial_state(model, phi0, c0)
        else:
            phi = np.array(phi0, dtype=np.float64)
            self.state = _SemiState(phi, 0.0, 0, 0)
        self.startup_solves = 0 if self.startup_steps == 0 else None
        self.last_fields = []

    @property
    def phi(self) -> np.ndarray:
        return self.state.phi

    @property
    def step_index(self) -> int:
        return self.state.step_index

    @property
    def solves(self) -> int:
        return self.state.solves

    @property
    def startup_steps(self) -> int:
        return steppers.startup_steps(self.scheme) if self.scheme in ESI_SCHEMES else 0

    @property
    def steady_solves_per_step(self) -> float:
        steady = self.step_index - self.startup_steps
        if self.startup_solves is None or steady <= 0:
            return float("nan")
        return (self.solves - self.startup_solves) / steady

    def advance(self) -> list:
        """Take the next step(s); ``last_fields`` holds the matching fields."""
        s, model, dt = self.state, self.model, self.dt
        if self.scheme in ESI_SCHEMES:
            new = steppers.advance(s, model, self.scheme)
            self.state = new[-1]
            if self.startup_solves is None:
                self.startup_solves = self.state.solves
            self.last_fields = [st.phi for st in new]
            return [steppers.observables(model, st, self.scheme) for st in new]
        if self.scheme == "sav":
            self.state = baselines.sav_step(s, model, dt)
        elif self.scheme == "new_sav":
            self.state = baselines.new_sav_step(s, model, dt)
        else:
            phi = baselines.semi_implicit_step(s.phi, model, dt)
            self.state = _SemiState(phi, s.t + dt, s.step_index + 1, s.solves + 1)
        self.last_fields = [self.state.phi]
        return [self.record()]

    def record(self) -> dict:
        """Series record; baselines put ``r^2`` (SAV) or ``R`` (new SAV) in ``log_r``."""
        s, grid = self.state, self.model.grid
        if self.scheme in ESI_SCHEMES:
            return steppers.observables(self.model, s, self.scheme)
        phi_hat = getattr(s, "phi_hat", None)
        if phi_hat is None:
            phi_hat = forward(grid, s.phi)
        rec = {"t": s.t, "energy": energy_from_spectrum(self.model, s.phi, phi_hat)}
        if self.scheme == "sav":
            rec.update(log_r=s.r**2, xi=float("nan"), v_xi=float("nan"))
        elif self.scheme == "new_sav":
            rec.update(log_r=s.big_r, xi=s.xi, v_xi=s.xi)
        else:
            rec.update(log_r=float("nan"), xi=float("nan"), v_xi=float("nan"))
        rec["mass"] = float(phi_hat[0, 0].real) / grid.size
        return rec


@dataclass(frozen=True)
class _SemiState:
    phi: np.ndarray
    t: float
    step_index: int
    solves: int


def run_to(model, scheme, phi0, dt, t_end, c0=None, sink=None):
    """Integrate to ``t_end``; returns ``(run, seconds)``."""
    n = steps_for(t_end, dt)
    run = SchemeRun(model, scheme, phi0, dt, c0)
    if n < run.startup_steps:
        raise ConfigError(f"{scheme} needs at least {run.startup_steps} steps")
    t0 = time.perf_counter()
    while run.step_index < n:
        recs = run.advance()
        if sink is not None:
            for r in recs:
                sink(r)
    return run, time.perf_counter() - t0


# ---------------------------------------------------------------- reports and outputs

@dataclass
class ExperimentReport:
    """Errors, pairwise rates, series records and verdicts of one harness run."""

    kind: str
    scheme: str | None = None
    dts: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    rates: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    series: list = field(default_factory=list)
    wall_clock_per_step: float | None = None
    solves_per_step: float | None = None
    verdicts: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_dict(self, include_series: bool = False) -> dict:
        d = asdict(self)
        if not include_series:
            d["series_length"] = len(d.pop("series"))
        return d

    def write_json(self, path, include_series: bool = False):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(_jsonable(self.to_dict(include_series)), indent=2) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class SeriesWriter:
    """CSV sink writing one row per step with 17 significant digits."""

    def __init__(self, path, header=SERIES_HEADER):
        self.header = tuple(header)
        self.path = None if path is None else Path(path)
        self._fh = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "w", newline="")
            self._fh.write(",".join(self.header) + "\n")

    def write(self, record: dict):
        if self._fh is not None:
            self._fh.write(",".join(f"{float(record[k]):.17g}" for k in self.header) + "\n")

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_series(path) -> dict:
    """Columns of a series CSV as float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=np.float64).reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_snapshot(path, values, grid: Grid, t: float, model: str, scheme: str) -> Path:
    """Raw little-endian float64 row-major dump plus a ``.json`` sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(values, dtype="<f8").tofile(path)
    meta = {"nx": grid.nx, "ny": grid.ny, "lx": grid.lx, "ly": grid.ly, "t": float(t),
            "model": model, "scheme": scheme}
    path.with_suffix(".json").write_text(json.dumps(meta) + "\n")
    return path


def read_snapshot(path):
    """Inverse of :func:`write_snapshot`; returns ``(values, meta)``."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    values = np.fromfile(path, dtype="<f8").reshape(meta["nx"], meta["ny"])
    return values, meta


def _resolve(path, out_dir):
    if path is None:
        return None
    path = Path(path)
    if out_dir is not None and not path.is_absolute():
        return Path(out_dir) / path
    return path


def _snapshot_steps(cfg: RunConfig) -> dict:
    return {int(round(t / cfg.dt)): t for t in cfg.outputs.snapshot_times}


def _count_increases(values, rtol=0.0) -> int:
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return 0
    scale = np.maximum(1.0, np.abs(v[:-1]))
    return int(np.sum(np.diff(v) > rtol * scale))


# ---------------------------------------------------------------- runners

def run_evolution(cfg: RunConfig, out_dir=None, energy_rtol: float = 1e-12) -> ExperimentReport:
    """Step ``cfg.scheme`` to ``t_end``, streaming series rows and snapshots.

    Verdicts count steps where ``log_r`` (exactly) or the energy (beyond
    ``energy_rtol`` relative) increased. Outputs written so far are flushed
    before a numerical failure propagates.
    """
    if cfg.model.name == "navier_stokes":
        return run_ns(cfg, out_dir)
    grid = build_grid(cfg)
    model = build_model(cfg, grid)
    phi0 = build_ic(cfg, grid)
    n = cfg.n_steps
    snaps = _snapshot_steps(cfg)
    snap_dir = _resolve(cfg.outputs.snapshots, out_dir)
    written = []

    def snapshot(values, t):
        if snap_dir is not None:
            p = write_snapshot(snap_dir / f"{model.name}_{cfg.scheme}_t{t:.6g}.bin", values, grid, t,
                               model.name, cfg.scheme)
            written.append(str(p))

    series = []
    run = SchemeRun(model, cfg.scheme, phi0, cfg.dt, cfg.c0)
    if n < run.startup_steps:
        raise ConfigError(f"{cfg.scheme} needs at least {run.startup_steps} steps")
    initial = run.record()
    if 0 in snaps:
        snapshot(phi0, 0.0)
    t0 = time.perf_counter()
    with SeriesWriter(_resolve(cfg.outputs.series, out_dir)) as writer:
        while run.step_index < n:
            start = run.step_index
            recs = run.advance()
            for k, (rec, values) in enumerate(zip(recs, run.last_fields), start=start + 1):
                writer.write(rec)
                series.append(rec)
                if k in snaps:
                    snapshot(values, snaps[k])
    seconds = time.perf_counter() - t0
    logs = [initial["log_r"]] + [r["log_r"] for r in series]
    energies = [initial["energy"]] + [r["energy"] for r in series]
    masses = np.array([initial["mass"]] + [r["mass"] for r in series])
    verdicts = {
        "log_r_increases": _count_increases(logs) if cfg.scheme in ESI_SCHEMES else None,
        "energy_increases": _count_increases(energies, energy_rtol),
        "all_finite": bool(np.all(np.isfinite(energies))),
        "mass_drift": float(np.max(np.abs(masses - masses[0]))),
    }
    verdicts["energy_monotone"] = verdicts["energy_increases"] == 0
    if verdicts["log_r_increases"] is not None:
        verdicts["log_r_monotone"] = verdicts["log_r_increases"] == 0
    steady = n - run.startup_steps
    return ExperimentReport(
        kind="evolve", scheme=cfg.scheme, dts=[cfg.dt], series=series,
        wall_clock_per_step=seconds / n, solves_per_step=run.steady_solves_per_step,
        verdicts=verdicts,
        meta={"model": model.name, "n_steps": n, "snapshots": written, "steady_steps": steady,
              "initial": initial},
    )


def _reference_scheme(cfg: RunConfig) -> str:
    if cfg.reference_scheme is not None:
        return cfg.reference_scheme
    return "bdf4" if scheme_order(cfg.scheme) >= 2 else cfg.scheme


def run_convergence(cfg: RunConfig, dts=None, reference_dt=None, *, model: ModelSpec | None = None,
                    phi0=None, reference=None) -> ExperimentReport:
    """L-infinity errors at ``t_end`` against a fine-step reference and pairwise rates.

    ``reference`` overrides the computed reference field (e.g. an exact solution).
    """
    dts = list(cfg.dts if dts is None else dts)
    reference_dt = cfg.reference_dt if reference_dt is None else reference_dt
    if not dts:
        raise ConfigError("convergence study needs a list of dts")
    for dt in dts:
        steps_for(cfg.t_end, dt)
    grid = build_grid(cfg) if model is None else model.grid
    model = build_model(cfg, grid) if model is None else model
    phi0 = build_ic(cfg, grid) if phi0 is None else phi0
    ref_scheme = _reference_scheme(cfg)
    if reference is None:
        if reference_dt is None:
            raise ConfigError("convergence study needs reference_dt")
        if not reference_dt < min(dts):
            raise ConfigError(f"reference_dt={reference_dt} must be below min(dts)={min(dts)}")
        ref_run, _ = run_to(model, ref_scheme, phi0, reference_dt, cfg.t_end, cfg.c0)
        reference = ref_run.phi
    errors, walls, solves = [], [], []
    for dt in dts:
        run, sec = run_to(model, cfg.scheme, phi0, dt, cfg.t_end, cfg.c0)
        errors.append(float(np.max(np.abs(run.phi - reference))))
        walls.append(sec / run.step_index)
        solves.append(run.steady_solves_per_step)
    rates = fit_rates(dts, errors)
    rows = [{"scheme": cfg.scheme, "dt": dt, "error": e, "rate": (rates[i - 1] if i else None),
             "wall_clock_per_step": w, "solves_per_step": s}
            for i, (dt, e, w, s) in enumerate(zip(dts, errors, walls, solves))]
    return ExperimentReport(
        kind="converge", scheme=cfg.scheme, dts=dts, errors=errors, rates=rates, rows=rows,
        wall_clock_per_step=float(np.mean(walls)), solves_per_step=solves[-1],
        meta={"model": model.name, "reference_dt": reference_dt, "reference_scheme": ref_scheme,
              "t_end": cfg.t_end},
    )


_SHARED = ("model", "grid", "ic", "seed", "t_end", "dts", "reference_dt", "dealias")


def run_comparison(configs) -> ExperimentReport:
    """One row per scheme per dt: error, rate, wall-clock and solves per step.

    ``configs`` is a list of configs differing only in ``scheme`` (or a single
    config whose ``schemes`` list is expanded).
    """
    if isinstance(configs, RunConfig):
        base = configs
        schemes = base.schemes or (base.scheme,)
        configs = [replace(base, scheme=s) for s in schemes]
    configs = list(configs)
    if not configs:
        raise ConfigError("comparison needs at least one config")
    first = configs[0]
    for c in configs[1:]:
        for key in _SHARED:
            if getattr(c, key) != getattr(first, key):
                raise ConfigError(f"comparison configs disagree on {key!r}")
    grid = build_grid(first)
    model = build_model(first, grid)
    phi0 = build_ic(first, grid)
    refs, rows, per_scheme = {}, [], {}
    for c in configs:
        ref_scheme = c.reference_scheme or c.scheme
        key = (ref_scheme, c.c0)
        if key not in refs:
            if first.reference_dt is None:
                raise ConfigError("comparison needs reference_dt")
            refs[key] = run_to(model, ref_scheme, phi0, first.reference_dt, first.t_end, c.c0)[0].phi
        rep = run_convergence(replace(c, reference_scheme=ref_scheme), model=model, phi0=phi0,
                              reference=refs[key])
        rep.meta["reference_scheme"] = ref_scheme
        rep.meta["reference_dt"] = first.reference_dt
        per_scheme.setdefault(c.scheme, rep)
        rows.extend(rep.rows)
    return ExperimentReport(
        kind="compare", dts=list(first.dts), rows=rows,
        meta={"model": model.name, "schemes": [c.scheme for c in configs],
              "reference_dt": first.reference_dt,
              "errors": {s: r.errors for s, r in per_scheme.items()},
              "rates": {s: r.rates for s, r in per_scheme.items()}},
    )


# ---------------------------------------------------------------- Navier-Stokes

def _ns_run(cfg, grid, dt, writer=None, series=None):
    nu = cfg.model.nu
    u0 = ns.taylor_green(grid, nu, 0.0)
    state = ns.ns_initial_state(u0, nu, cfg.model.scale_c)
    n = steps_for(cfg.t_end, dt)
    initial = ns.ns_observables(state)
    t0 = time.perf_counter()
    for _ in range(n):
        state = ns.ns_step(state, dt, cfg.dealias_on)
        if writer is not None or series is not None:
            rec = ns.ns_observables(state)
            if writer is not None:
                writer.write(rec)
            if series is not None:
                series.append(rec)
    return state, initial, time.perf_counter() - t0


def ns_error(state, grid, nu, t) -> float:
    exact = ns.taylor_green(grid, nu, t)
    return float(max(np.max(np.abs(state.u.ux - exact.ux)), np.max(np.abs(state.u.uy - exact.uy))))


def run_ns(cfg: RunConfig, out_dir=None) -> ExperimentReport:
    """Taylor-Green run at ``cfg.dt`` with series output, plus a dt study if ``dts`` is set."""
    if cfg.model.name != "navier_stokes":
        raise ConfigError("ns runs need model.name = 'navier_stokes'")
    if cfg.ic.preset not in ("taylor_green", "ac_cos"):
        raise ConfigError(f"Navier-Stokes preset {cfg.ic.preset!r} is not supported; use 'taylor_green'")
    grid = build_grid(cfg)
    nu = cfg.model.nu
    series = []
    with SeriesWriter(_resolve(cfg.outputs.series, out_dir), NS_SERIES_HEADER) as writer:
        state, initial, sec = _ns_run(cfg, grid, cfg.dt, writer, series)
    snap_dir = _resolve(cfg.outputs.snapshots, out_dir)
    written = []
    if snap_dir is not None:
        for comp, values in (("ux", state.u.ux), ("uy", state.u.uy)):
            written.append(str(write_snapshot(snap_dir / f"navier_stokes_{comp}_t{state.t:.6g}.bin",
                                              values, grid, state.t, "navier_stokes", "first_order")))
    energies = [initial["kinetic_energy"]] + [r["kinetic_energy"] for r in series]
    logs = [initial["log_r"]] + [r["log_r"] for r in series]
    verdicts = {
        "kinetic_energy_increases": _count_increases(energies, 1e-12),
        "log_r_increases": _count_increases(logs),
        "max_div": float(max(r["max_div"] for r in series)),
    }
    dts, errors = [cfg.dt], [ns_error(state, grid, nu, state.t)]
    if cfg.dts:
        dts = list(cfg.dts)
        errors = []
        for dt in dts:
            st, _, _ = _ns_run(cfg, grid, dt)
            errors.append(ns_error(st, grid, nu, st.t))
    n = steps_for(cfg.t_end, cfg.dt)
    return ExperimentReport(
        kind="ns", scheme="first_order", dts=dts, errors=errors, rates=fit_rates(dts, errors),
        series=series, wall_clock_per_step=sec / n, solves_per_step=state.solves / n,
        verdicts=verdicts, meta={"model": "navier_stokes", "nu": nu, "n_steps": n, "snapshots": written},
    )


# ---------------------------------------------------------------- --check

def evaluate_checks(report: ExperimentReport, check: dict) -> list:
    """``(name, passed, detail)`` for every threshold in ``check``.

    Keys: ``rate_min``/``rate_max`` (applied to the last ``rate_pairs`` rates,
    default all), ``max_error`` (finest error), ``monotone`` (energy and
    log R), ``max_div``, ``mass_drift``, ``solves_per_step``.
    """
    out = []
    if not check:
        return out
    rates = [r for r in report.rates if r is not None]
    pairs = int(check.get("rate_pairs", len(rates)))
    tail = rates[-pairs:] if pairs else []
    if "rate_min" in check:
        out.append(("rate_min", bool(tail) and all(r >= check["rate_min"] for r in tail), tail))
    if "rate_max" in check:
        out.append(("rate_max", bool(tail) and all(r <= check["rate_max"] for r in tail), tail))
    if "max_error" in check:
        e = report.errors[-1] if report.errors else float("nan")
        out.append(("max_error", e <= check["max_error"], e))
    v = report.verdicts
    if check.get("monotone"):
        bad = {k: v[k] for k in v if k.endswith("_increases") and v[k]}
        out.append(("monotone", not bad, bad))
    if "max_div" in check:
        out.append(("max_div", v.get("max_div", float("inf")) <= check["max_div"], v.get("max_div")))
    if "mass_drift" in check:
        out.append(("mass_drift", v.get("mass_drift", float("inf")) <= check["mass_drift"], v.get("mass_drift")))
    if "solves_per_step" in check:
        want = check["solves_per_step"]
        got = report.solves_per_step if not report.rows else {r["scheme"]: r["solves_per_step"] for r in report.rows}
        ok = got == want if not isinstance(got, dict) else all(
            got.get(s) == n for s, n in (want.items() if isinstance(want, dict) else ((s, want) for s in got)))
        out.append(("solves_per_step", ok, got))
    return out
