"""Run configuration: key=value config files plus flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .model import SystemParams


@dataclass
class RunConfig:
    """One experiment manifest; every field can come from the config file or a flag."""

    kind: str = "simulate"
    n_balls: int = 2
    dim: int = 2
    torus_side: float = 1.0
    radius: float = 0.1
    masses: tuple[float, ...] = ()
    allow_zero_mass: bool = False
    seed: int = 0
    n_collisions: int = 0
    total_time: float = 0.0
    segment_length: int = 10
    ensemble_size: int = 10
    renorm_every: int = 10
    frame_size: int = 0  # 0 means full frame
    tol_zero: float = 0.0  # 0 means the 5*lambda_1/sqrt(T) default
    rich_min: int = 0  # 0 means ceil(C(N))
    random_masses: bool = False
    with_jacobian: bool = False
    eps_tangent: float = 1e-12
    events: str = ""  # input event log for the richness command
    out: str = "."
    jobs: int = 1

    def system_params(self) -> SystemParams:
        masses = self.masses if self.masses else tuple(1.0 for _ in range(self.n_balls))
        if len(masses) != self.n_balls:
            raise ConfigError(
                f"expected {self.n_balls} masses, got {len(masses)}"
            )
        return SystemParams(
            n_balls=self.n_balls,
            dim=self.dim,
            torus_side=self.torus_side,
            radius=self.radius,
            masses=masses,
            allow_zero_mass=self.allow_zero_mass,
        )


_KINDS = ("simulate", "sufficiency", "lyapunov", "richness", "selftest")


def _coerce(name: str, kind: type, raw: str):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if name == "masses":
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config_file(path) -> dict:
    """key=value lines; blank lines and #-comments ignored."""
    spec = {f.name: f.type for f in fields(RunConfig)}
    types = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {body!r}")
        key, val = (s.strip() for s in body.split("=", 1))
        if key not in spec:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, types[key], val)
    return out


def build_config(file_values: dict, overrides: dict) -> RunConfig:
    cfg = replace(RunConfig(), **file_values)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    if cfg.kind not in _KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    for name in ("segment_length", "ensemble_size", "renorm_every", "jobs"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be positive")
    for name in ("n_collisions", "total_time", "frame_size", "tol_zero", "rich_min"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be nonnegative")
    return cfg
