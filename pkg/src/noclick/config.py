"""Run configuration: defaults, figure presets, TOML loading and validation."""

from __future__ import annotations

import dataclasses
import math
import os
import sys
from dataclasses import dataclass, field, fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .basis import SectorLabel
from .cache import POLICIES
from .dsff import RMT_CLASSES, THETA_PRESETS
from .hamiltonian import MODELS, Disorder, ModelSpec

COMMANDS = ("spectrum", "steady-state", "entropy-scan", "gap-scan", "phase-diagram", "dsff",
            "rmt-baseline", "perturbation-check", "oracle")

GAP_MODES = ("three_level", "two_level")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def default_cache_dir() -> str:
    env = os.environ.get("NOCLICK_CACHE_DIR")
    if env:
        return env
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return os.path.join(base, "noclick")


@dataclass
class RunConfig:
    command: str = "spectrum"
    # model
    model: str = "transverse_measured"
    L: int = 8
    h: float = 0.3
    gamma: float = 0.8
    J: float = 1.0
    J2: float = 0.0
    g: float = 0.0
    disorder: float | None = None
    # selection and sweeps
    sector: str = "full"
    L_list: list = field(default_factory=lambda: [8, 10, 12, 14])
    grid_h: list = field(default_factory=list)
    grid_gamma: list = field(default_factory=list)
    gap_mode: str = "three_level"
    L_A: int | None = None
    # dsff
    realizations: int = 200
    theta_preset: str = "fig3"
    connected: bool = True
    resolve_z2: bool = True
    n_tau: int = 160
    tau_min: float = 0.01
    tau_max: float = 20.0
    heisenberg_c: float = 1.0
    rmt_class: str = "AIdagger"
    N: int | None = None
    samples: int = 200
    # oracle
    n_k: int = 10000
    # run
    seed: int = 0
    out: str = "noclick-out"
    jobs: int = field(default_factory=_default_jobs)
    cache: str = "use"
    cache_dir: str | None = None
    preset: str | None = None

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def model_spec(self, **overrides) -> ModelSpec:
        d = dict(model=self.model, L=self.L, h=self.h, gamma=self.gamma, J=self.J, J2=self.J2, g=self.g)
        d.update(overrides)
        dis = Disorder(self.disorder, self.seed) if self.disorder else None
        return ModelSpec(disorder=dis, **d)

    def theta_values(self) -> tuple:
        return THETA_PRESETS[self.theta_preset]

    def sectors(self):
        """Parsed ``sector`` entry: a list of labels, or the string ``"all"``."""
        if self.sector.strip() == "all":
            return "all"
        return [SectorLabel.parse(s.strip()) for s in self.sector.split(";") if s.strip()]


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))

PRESETS = {
    "fig1": dict(command="phase-diagram", model="transverse_measured", h=0.3, gamma=0.8,
                 L_list=[8, 10, 12, 14, 16, 18],
                 grid_h=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
                 grid_gamma=[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0]),
    "fig2": dict(command="entropy-scan", model="transverse_measured", h=0.2, gamma=1.0,
                 grid_gamma=[1.0, 2.0, 3.0, 5.0, 6.0], L_list=[8, 10, 12, 14, 16, 18, 20]),
    "fig3": dict(command="dsff", model="nnn_transverse_measured", L=10, h=0.3, J2=0.9, gamma=1.6,
                 realizations=200, theta_preset="fig3", L_list=[8, 10, 12, 14, 16]),
    "fig4": dict(command="dsff", model="longfield_transverse_measured", L=10, h=0.25, g=0.14, gamma=1.2,
                 realizations=1000, theta_preset="fig4", L_list=[8, 10, 12, 14, 16]),
    "fig5": dict(command="dsff", model="longitudinal_measured", L=10, h=0.7, gamma=1.2,
                 realizations=1000, theta_preset="fig5", gap_mode="two_level",
                 L_list=[8, 10, 12, 14, 16]),
}


def load_toml(path) -> dict:
    """Read a config file; nested tables are flattened onto RunConfig field names."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    flat = {}

    def walk(table, where):
        for key, val in table.items():
            name = key.replace("-", "_")
            if isinstance(val, dict):
                walk(val, f"{where}{key}.")
                continue
            if name not in FIELD_NAMES:
                raise ConfigError(f"{where}{key}", "unknown field")
            if name in flat:
                raise ConfigError(f"{where}{key}", "given twice")
            flat[name] = val

    walk(raw, "")
    return flat


def _as_int(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (isinstance(v, float) and not v.is_integer()):
        raise ConfigError(name, f"expected an integer, got {v!r}")
    return int(v)


def _as_float(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(name, f"expected a finite number, got {v!r}")
    return float(v)


def resolve(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then preset, then file values, then explicit overrides."""
    merged = {}
    layers = [file_values or {}, overrides or {}]
    preset = None
    for layer in layers:
        if layer.get("preset") is not None:
            preset = layer["preset"]
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
    for layer in layers:
        merged.update({k: v for k, v in layer.items() if v is not None})
    for k in merged:
        if k not in FIELD_NAMES:
            raise ConfigError(k, "unknown field")
    cfg = RunConfig(**merged)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Coerce numeric types in place and raise :class:`ConfigError` on the first bad field."""
    if cfg.command not in COMMANDS:
        raise ConfigError("command", f"unknown command {cfg.command!r}")
    if cfg.model not in MODELS:
        raise ConfigError("model", f"unknown model {cfg.model!r}; choose from {MODELS}")
    for name in ("L", "realizations", "seed", "jobs", "n_tau", "samples", "n_k"):
        setattr(cfg, name, _as_int(name, getattr(cfg, name)))
    for name in ("h", "gamma", "J", "J2", "g", "tau_min", "tau_max", "heisenberg_c"):
        setattr(cfg, name, _as_float(name, getattr(cfg, name)))
    if not 2 <= cfg.L <= 30:
        raise ConfigError("L", "must be in [2, 30]")
    if cfg.gamma < 0:
        raise ConfigError("gamma", "must be >= 0")
    if cfg.disorder is not None:
        cfg.disorder = _as_float("disorder", cfg.disorder)
        if cfg.disorder < 0:
            raise ConfigError("disorder", "must be >= 0")
    for name in ("L_list", "grid_h", "grid_gamma"):
        val = getattr(cfg, name)
        if not isinstance(val, (list, tuple)):
            raise ConfigError(name, "expected a list")
        conv = _as_int if name == "L_list" else _as_float
        setattr(cfg, name, [conv(f"{name}[{i}]", v) for i, v in enumerate(val)])
    if any(not 2 <= L <= 30 for L in cfg.L_list):
        raise ConfigError("L_list", "sizes must be in [2, 30]")
    if len(set(cfg.L_list)) != len(cfg.L_list):
        raise ConfigError("L_list", "sizes must be distinct")
    if any(g < 0 for g in cfg.grid_gamma):
        raise ConfigError("grid_gamma", "rates must be >= 0")
    if cfg.gap_mode not in GAP_MODES:
        raise ConfigError("gap_mode", f"must be one of {GAP_MODES}")
    if cfg.L_A is not None:
        cfg.L_A = _as_int("L_A", cfg.L_A)
        if cfg.L_A < 1:
            raise ConfigError("L_A", "must be >= 1")
    if cfg.realizations < 1:
        raise ConfigError("realizations", "must be >= 1")
    if cfg.theta_preset not in THETA_PRESETS:
        raise ConfigError("theta_preset", f"choose from {sorted(THETA_PRESETS)}")
    if not isinstance(cfg.connected, bool):
        raise ConfigError("connected", "expected true or false")
    if not isinstance(cfg.resolve_z2, bool):
        raise ConfigError("resolve_z2", "expected true or false")
    if cfg.n_tau < 1 or not 0 < cfg.tau_min < cfg.tau_max:
        raise ConfigError("tau_min", "need n_tau >= 1 and 0 < tau_min < tau_max")
    if cfg.heisenberg_c <= 0:
        raise ConfigError("heisenberg_c", "must be > 0")
    if cfg.rmt_class not in RMT_CLASSES:
        raise ConfigError("rmt_class", f"choose from {RMT_CLASSES}")
    if cfg.N is not None:
        cfg.N = _as_int("N", cfg.N)
        if cfg.N < 2:
            raise ConfigError("N", "must be >= 2")
    if cfg.samples < 1:
        raise ConfigError("samples", "must be >= 1")
    if cfg.n_k < 2:
        raise ConfigError("n_k", "must be >= 2")
    if cfg.seed < 0:
        raise ConfigError("seed", "must be >= 0")
    if cfg.jobs < 1:
        raise ConfigError("jobs", "must be >= 1")
    if cfg.cache not in POLICIES:
        raise ConfigError("cache", f"must be one of {POLICIES}")
    try:
        sectors = cfg.sectors()
    except ValueError as exc:
        raise ConfigError("sector", str(exc)) from None
    if sectors != "all":
        for lab in sectors:
            if lab.momentum is not None and not 0 <= lab.momentum < cfg.L:
                raise ConfigError("sector", f"momentum {lab.momentum} out of range for L={cfg.L}")
    try:
        cfg.model_spec()
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None
