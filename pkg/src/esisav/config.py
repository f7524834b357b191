"""Run configuration: a JSON object whose snake_case keys mirror :class:`RunConfig`."""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError

ESI_SCHEMES = ("first_order", "cn", "bdf2", "bdf3", "bdf4")
BASELINE_SCHEMES = ("sav", "new_sav", "semi")
SCHEMES = ESI_SCHEMES + BASELINE_SCHEMES
MODELS = ("allen_cahn", "cahn_hilliard", "pfc", "navier_stokes")

_ALIASES = {
    "first": "first_order", "euler": "first_order", "esi_sav": "first_order", "esi-sav": "first_order",
    "crank_nicolson": "cn", "bdf-2": "bdf2", "bdf-3": "bdf3", "bdf-4": "bdf4",
    "nsav": "new_sav", "new-sav": "new_sav", "classical_sav": "sav",
    "semi_implicit": "semi", "semi-implicit": "semi",
}

_PI_RE = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*$")


def parse_real(value, what="value") -> float:
    """Float, or a string multiple of pi such as ``"2pi"`` or ``"2*pi"``."""
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        try:
            if m:
                return (float(m.group(1)) if m.group(1) not in ("", "+") else 1.0) * math.pi
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{what}: cannot parse {value!r} as a number")


def canonical_scheme(name: str) -> str:
    key = str(name).strip().lower()
    key = _ALIASES.get(key, key)
    if key not in SCHEMES:
        raise ConfigError(f"unknown scheme {name!r}; choose from {', '.join(SCHEMES)}")
    return key


def scheme_order(name: str) -> int:
    name = canonical_scheme(name)
    return {"cn": 2, "bdf2": 2, "bdf3": 3, "bdf4": 4}.get(name, 1)


@dataclass(frozen=True)
class ModelConfig:
    name: str = "allen_cahn"
    epsilon: float = 0.1
    beta: float = 0.0
    scale_c: float | None = None
    nu: float = 0.1

    def __post_init__(self):
        if self.name not in MODELS:
            raise ConfigError(f"unknown model {self.name!r}; choose from {', '.join(MODELS)}")
        for key in ("epsilon", "beta", "nu"):
            object.__setattr__(self, key, parse_real(getattr(self, key), f"model.{key}"))
        if self.scale_c is not None:
            c = parse_real(self.scale_c, "model.scale_c")
            if not c > 0:
                raise ConfigError(f"model.scale_c={c!r}: must be positive")
            object.__setattr__(self, "scale_c", c)
        if not self.epsilon > 0 or self.beta < 0 or not self.nu > 0:
            raise ConfigError("model: need epsilon > 0, beta >= 0, nu > 0")


@dataclass(frozen=True)
class GridConfig:
    nx: int = 128
    ny: int = 128
    lx: float = 2 * math.pi
    ly: float = 2 * math.pi

    def __post_init__(self):
        for key in ("nx", "ny"):
            v = getattr(self, key)
            if isinstance(v, bool) or not isinstance(v, int) or v < 4 or v % 2:
                raise ConfigError(f"grid.{key}={v!r}: must be an even integer >= 4")
        for key in ("lx", "ly"):
            v = parse_real(getattr(self, key), f"grid.{key}")
            if not v > 0:
                raise ConfigError(f"grid.{key}={v!r}: must be positive")
            object.__setattr__(self, key, v)


@dataclass(frozen=True)
class IcConfig:
    preset: str = "ac_cos"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OutputConfig:
    series: str | None = None
    snapshots: str | None = None
    snapshot_times: tuple = ()
    report: str | None = None


@dataclass(frozen=True)
class RunConfig:
    """One experiment.

    ``dts``, ``reference_dt``, ``reference_scheme`` and ``schemes`` are only
    read by the convergence and comparison studies; ``c0`` only
    by the SAV baselines. ``check`` holds the thresholds used by ``--check``.
    """

    model: ModelConfig = field(default_factory=ModelConfig)
    scheme: str = "first_order"
    grid: GridConfig = field(default_factory=GridConfig)
    dt: float = 0.01
    t_end: float = 1.0
    ic: IcConfig = field(default_factory=IcConfig)
    seed: int = 0
    outputs: OutputConfig = field(default_factory=OutputConfig)
    dealias: bool | None = None
    dts: tuple = ()
    reference_dt: float | None = None
    reference_scheme: str | None = None
    schemes: tuple = ()
    c0: float | None = None
    check: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model.name != "navier_stokes":
            object.__setattr__(self, "scheme", canonical_scheme(self.scheme))
        object.__setattr__(self, "schemes", tuple(canonical_scheme(s) for s in self.schemes))
        if self.reference_scheme is not None:
            object.__setattr__(self, "reference_scheme", canonical_scheme(self.reference_scheme))
        dt = parse_dt(self.dt)
        t_end = parse_real(self.t_end, "t_end")
        if not (math.isfinite(t_end) and t_end > 0):
            raise ConfigError(f"t_end={t_end!r}: must be positive")
        if not (math.isfinite(dt) and dt > 0):
            raise ConfigError(f"dt={dt!r}: must be positive")
        if dt > t_end * (1 + 1e-12):
            raise ConfigError(f"dt={dt} exceeds t_end={t_end}")
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "t_end", t_end)
        dts = tuple(parse_dt(v) for v in self.dts)
        if any(not d > 0 for d in dts):
            raise ConfigError("dts must all be positive")
        object.__setattr__(self, "dts", dts)
        if self.reference_dt is not None:
            object.__setattr__(self, "reference_dt", parse_dt(self.reference_dt))
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed={self.seed!r}: must be an unsigned 64-bit integer")
        times = tuple(parse_real(t, "outputs.snapshot_times") for t in self.outputs.snapshot_times)
        if any(t < 0 or t > t_end * (1 + 1e-12) for t in times):
            raise ConfigError(f"snapshot times {times} must lie in [0, t_end]")
        object.__setattr__(self, "outputs", replace(self.outputs, snapshot_times=times))
        if self.c0 is not None:
            object.__setattr__(self, "c0", parse_real(self.c0, "c0"))

    @property
    def dealias_on(self) -> bool:
        if self.dealias is None:
            return self.model.name == "navier_stokes"
        return bool(self.dealias)

    @property
    def n_steps(self) -> int:
        return steps_for(self.t_end, self.dt)

    def with_overrides(self, **kw) -> "RunConfig":
        """Copy with the non-``None`` entries of ``kw`` replaced."""
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outputs"]["snapshot_times"] = list(self.outputs.snapshot_times)
        d["dts"] = list(self.dts)
        d["schemes"] = list(self.schemes)
        return d


def parse_dt(v) -> float:
    """Time step given as a number, ``"1/64"`` or a pi multiple."""
    if isinstance(v, str) and "/" in v:
        num, _, den = v.partition("/")
        try:
            return float(num) / float(den)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"cannot parse time step {v!r}") from None
    return parse_real(v, "dt")


def steps_for(t_end: float, dt: float, tol: float = 1e-12) -> int:
    """Number of steps of size ``dt`` reaching ``t_end``; raises if not an integer."""
    n = round(t_end / dt)
    if n < 1 or abs(n * dt - t_end) > tol * max(1.0, abs(t_end)):
        raise ConfigError(f"dt={dt!r} does not divide t_end={t_end!r}")
    return int(n)


def _sub(cls, raw, what):
    if raw is None:
        return cls()
    if isinstance(raw, cls):
        return raw
    if cls is IcConfig and isinstance(raw, str):
        return IcConfig(raw)
    if not isinstance(raw, dict):
        raise ConfigError(f"{what}: expected an object")
    allowed = {f.name for f in fields(cls)}
    if cls is IcConfig:
        raw = dict(raw)
        preset = raw.pop("preset", "ac_cos")
        params = dict(raw.pop("params", {}))
        params.update(raw)
        return IcConfig(preset, params)
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{what}: unknown keys {sorted(unknown)}")
    if cls is OutputConfig and "snapshot_times" in raw:
        raw = {**raw, "snapshot_times": tuple(raw["snapshot_times"])}
    return cls(**raw)


def config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    allowed = {f.name for f in fields(RunConfig)}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    d = dict(d)
    kw = {
        "model": _sub(ModelConfig, d.pop("model", None), "model"),
        "grid": _sub(GridConfig, d.pop("grid", None), "grid"),
        "ic": _sub(IcConfig, d.pop("ic", None), "ic"),
        "outputs": _sub(OutputConfig, d.pop("outputs", None), "outputs"),
    }
    for key in ("dts", "schemes"):
        if key in d:
            if not isinstance(d[key], (list, tuple)):
                raise ConfigError(f"{key}: expected a list")
            kw[key] = tuple(d.pop(key))
    try:
        return RunConfig(**kw, **d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(raw)
