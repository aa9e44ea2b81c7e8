"""Run configuration: one TOML file per run, parsed into nested dataclasses.

Unknown sections and keys are rejected by name; parse errors carry the line
and column reported by the TOML reader.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .geometry import Constants

OUT_ENV = "WARPSCATTER_OUT"


@dataclass
class ProfileConfig:
    kind: str = "horn_euclidean"  # power_law | cylinder | horn_euclidean | csv
    n: int = 2
    beta_minus: float = 1.0
    tau_minus: float = 1.0
    beta_plus: float = -1.0
    tau_plus: float = 1.0
    tau: float = 1.0
    path: str = ""
    L: float = 200.0
    grid_step: float = 0.01


@dataclass
class GeometryConfig:
    s_min: float = -20.0
    s_max: float = 20.0
    count: int = 401


@dataclass
class ConstantsConfig:
    C0: float = 1.0
    c: float = 1.0
    C1: float = 1.0
    C: float = 1.0
    iota_factor: float = 0.25
    threshold: float = 0.5

    def constants(self) -> Constants:
        return Constants(self.C0, self.c, self.C1, self.C, self.iota_factor)

    def header(self) -> str:
        return f"{self.constants().header()} threshold={self.threshold:g}"


@dataclass
class ChannelsConfig:
    m_max: int = 3


@dataclass
class ScatterConfig:
    potential: str = "channel"  # channel | zero | square_barrier
    m: int = 0
    barrier_height: float = 1.0
    barrier_width: float = 1.0
    k_min: float = 0.1
    k_max: float = 10.0
    k_count: int = 100
    k_spacing: str = "linear"
    velocities: list = field(default_factory=lambda: [5.0, 10.0, 20.0, 40.0])
    envelope_halfwidth: float = 1.0


@dataclass
class PropagateConfig:
    potential: str = "channel"  # channel | zero | square_barrier
    m: int = 0
    barrier_height: float = 1.0
    barrier_width: float = 1.0
    state: str = "plane_mod"  # plane_mod | odd_dirichlet
    v: float = 10.0
    center: float = -60.0
    envelope_halfwidth: float = 1.0
    L: float = 400.0
    step: float = 0.01
    T: float = 0.0  # 0 picks a time at which the slowest component has left the center
    dt: float = 0.0  # 0 picks min(0.5 / k_max^2, 0.005)
    split_radius: float = 20.0
    wall: bool = False


@dataclass
class PerturbationConfig:
    mode: str = "warp"  # warp | conformal
    bump_center: float = 0.0
    bump_halfwidth: float = 2.0
    eps: float = 0.01
    gamma: float = 0.5
    ball_eps: float = math.inf


@dataclass
class StabilityConfig:
    mode: str = "warp"
    bump_center: float = 0.0
    bump_halfwidth: float = 2.0
    eps: list = field(default_factory=lambda: [0.1, 0.01, 0.001])
    gamma: float = 0.5
    ball_eps: float = math.inf
    v: float = 10.0
    channels: list = field(default_factory=lambda: [0])
    k_min: float = 0.5
    k_max: float = 10.0
    k_count: int = 40
    envelope_halfwidth: float = 1.0


@dataclass
class OutputConfig:
    dir: str = "out"


@dataclass
class RunConfig:
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    constants: ConstantsConfig = field(default_factory=ConstantsConfig)
    channels: ChannelsConfig = field(default_factory=ChannelsConfig)
    scatter: ScatterConfig = field(default_factory=ScatterConfig)
    propagate: PropagateConfig = field(default_factory=PropagateConfig)
    distance: PerturbationConfig = field(default_factory=PerturbationConfig)
    stability: StabilityConfig = field(default_factory=StabilityConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


_CHOICES = {
    ("profile", "kind"): ("power_law", "cylinder", "horn_euclidean", "csv"),
    ("scatter", "potential"): ("channel", "zero", "square_barrier"),
    ("scatter", "k_spacing"): ("linear", "log"),
    ("propagate", "potential"): ("channel", "zero", "square_barrier"),
    ("propagate", "state"): ("plane_mod", "odd_dirichlet"),
    ("distance", "mode"): ("warp", "conformal"),
    ("stability", "mode"): ("warp", "conformal"),
}

_POSITIVE = {
    ("profile", "tau_minus"), ("profile", "tau_plus"), ("profile", "tau"), ("profile", "L"),
    ("profile", "grid_step"), ("geometry", "count"), ("constants", "C0"), ("constants", "c"),
    ("constants", "C1"), ("constants", "C"), ("constants", "iota_factor"),
    ("constants", "threshold"), ("scatter", "barrier_width"), ("scatter", "k_min"),
    ("scatter", "k_max"), ("scatter", "k_count"), ("scatter", "envelope_halfwidth"),
    ("propagate", "barrier_width"), ("propagate", "envelope_halfwidth"), ("propagate", "L"),
    ("propagate", "step"), ("propagate", "split_radius"), ("distance", "bump_halfwidth"),
    ("distance", "gamma"), ("distance", "ball_eps"), ("stability", "bump_halfwidth"),
    ("stability", "gamma"), ("stability", "ball_eps"), ("stability", "v"),
    ("stability", "k_min"), ("stability", "k_max"), ("stability", "k_count"),
    ("stability", "envelope_halfwidth"),
}

_NON_NEGATIVE = {("channels", "m_max"), ("scatter", "m"), ("propagate", "m"), ("propagate", "T"),
                 ("propagate", "dt"), ("distance", "eps")}


def _coerce(section: str, key: str, value, default):
    where = f"[{section}] {key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{where} must be a list of numbers")
        if key == "channels":
            if not all(isinstance(v, int) and v >= 0 for v in value):
                raise ConfigError(f"{where} must list integers >= 0")
            return [int(v) for v in value]
        return [float(v) for v in value]
    return value


def _validate(cfg: RunConfig) -> None:
    for f in fields(cfg):
        section = f.name
        sub = getattr(cfg, section)
        for g in fields(sub):
            val = getattr(sub, g.name)
            key = (section, g.name)
            if key in _CHOICES and val not in _CHOICES[key]:
                raise ConfigError(f"[{section}] {g.name} must be one of {_CHOICES[key]}, got {val!r}")
            if key in _POSITIVE and not val > 0:
                raise ConfigError(f"[{section}] {g.name} must be positive, got {val!r}")
            if key in _NON_NEGATIVE and not val >= 0:
                raise ConfigError(f"[{section}] {g.name} must be non-negative, got {val!r}")
    if cfg.profile.n < 2:
        raise ConfigError("[profile] n must be an integer >= 2")
    if cfg.profile.kind == "csv" and not cfg.profile.path:
        raise ConfigError("[profile] path is required when kind = 'csv'")
    if cfg.scatter.k_min > cfg.scatter.k_max:
        raise ConfigError("[scatter] k_min must not exceed k_max")
    if cfg.stability.k_min > cfg.stability.k_max:
        raise ConfigError("[stability] k_min must not exceed k_max")
    if cfg.geometry.s_min >= cfg.geometry.s_max:
        raise ConfigError("[geometry] s_min must be below s_max")
    if any(v <= 0 for v in cfg.scatter.velocities):
        raise ConfigError("[scatter] velocities must be positive")
    if any(e < 0 for e in cfg.stability.eps):
        raise ConfigError("[stability] eps values must be non-negative")


def from_mapping(data: dict) -> RunConfig:
    cfg = RunConfig()
    sections = {f.name: f for f in fields(cfg)}
    for name, body in data.items():
        if name not in sections:
            raise ConfigError(f"unknown section [{name}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{name}] must be a table")
        sub = getattr(cfg, name)
        known = {f.name: f for f in fields(sub)}
        for key, value in body.items():
            if key not in known:
                raise ConfigError(f"unknown key '{key}' in [{name}]")
            setattr(sub, key, _coerce(name, key, value, getattr(sub, key)))
    _validate(cfg)
    return cfg


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from exc
    return from_mapping(data)


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    cfg = parse_config(text, str(p))
    if cfg.profile.kind == "csv" and not Path(cfg.profile.path).is_absolute():
        cfg.profile.path = str((p.parent / cfg.profile.path).resolve())
    return cfg


def output_dir(cfg: RunConfig, cli_out: str | None, environ) -> Path:
    """--out wins over the environment override, which wins over the config."""
    if cli_out:
        return Path(cli_out)
    if environ.get(OUT_ENV):
        return Path(environ[OUT_ENV])
    return Path(cfg.output.dir)


def as_dict(obj) -> dict:
    if is_dataclass(obj):
        return {f.name: as_dict(getattr(obj, f.name)) for f in fields(obj)}
    return obj
