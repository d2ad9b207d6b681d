"""Sweep configuration: nested dataclass blocks read from TOML, overridable by ``block.field=value``."""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .lattice import Boundary, LatticeSpec, ModelParams, build_pair_lattice


class ConfigError(ValueError):
    pass


@dataclass
class LatticeBlock:
    d: int = 1
    n: int = 2
    boundary: str = "open"


@dataclass
class ParamsBlock:
    kappa: float = 1.0
    g: float = 0.1
    delta_mu: float = 100.0
    lam: float = 0.1
    n_max: int = 6
    # "fixed": ground state in the n_total sector; "global": minimum over sectors 0..n_total
    sector_mode: str = "fixed"
    n_total: int = 12
    # rerun every point with n_max + 1 and flag J_m changes above 1%
    cap_check: bool = False


@dataclass
class GridBlock:
    # "map": (mu/U, kappa/U) grid at fixed kappa; "slice": U sweep at fixed mu/U
    mode: str = "map"
    mu_min: float = 0.0
    mu_max: float = 3.0
    mu_steps: int = 40
    kappa_min: float = 0.0075
    kappa_max: float = 0.3
    kappa_steps: int = 40
    slice_mu_over_u: float = 0.5
    u_min: float = 0.1
    u_max: float = 20.0
    u_steps: int = 40

    def mu_axis(self) -> np.ndarray:
        return np.linspace(self.mu_min, self.mu_max, self.mu_steps)

    def kappa_axis(self) -> np.ndarray:
        return np.linspace(self.kappa_min, self.kappa_max, self.kappa_steps)

    def u_axis(self) -> np.ndarray:
        return np.linspace(self.u_min, self.u_max, self.u_steps)


@dataclass
class DynamicsBlock:
    tau_delta_mu: float = 20.0
    samples_per_period: int = 256
    min_periods: float = 10.0
    omega_min: float = 0.0
    omega_max: float = 200.0
    omega_step: float = 1.0

    def omega_axis(self) -> np.ndarray:
        count = int(round((self.omega_max - self.omega_min) / self.omega_step)) + 1
        return self.omega_min + self.omega_step * np.arange(count)


@dataclass
class OutputBlock:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv"])
    workers: int = 1


@dataclass
class SweepConfig:
    lattice: LatticeBlock = field(default_factory=LatticeBlock)
    params: ParamsBlock = field(default_factory=ParamsBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    dynamics: DynamicsBlock = field(default_factory=DynamicsBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def spec(self) -> LatticeSpec:
        return build_pair_lattice(self.lattice.d, self.lattice.n, Boundary(self.lattice.boundary))

    def model_params(self, u: float, mu: float, lam: float | None = None) -> ModelParams:
        p = self.params
        return ModelParams(
            kappa=p.kappa,
            u=u,
            mu=mu,
            g=p.g,
            delta_mu=p.delta_mu,
            lam=p.lam if lam is None else lam,
            n_max=p.n_max,
            n_total_max=p.n_total,
        )

    def sector_search(self):
        if self.params.sector_mode == "fixed":
            return [self.params.n_total]
        return range(0, self.params.n_total + 1)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(value, target_type, name):
    if target_type in ("bool", bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false, got {value!r}")
        return value
    if target_type in ("float", float):
        return float(value)
    if target_type in ("int", int):
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{name} must be an integer, got {value}")
        return int(value)
    if target_type in ("str", str):
        return str(value)
    if target_type in ("list", list):
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        return list(value)
    return value


def _parse_scalar(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _set(cfg: SweepConfig, dotted: str, value) -> None:
    parts = dotted.split(".")
    if len(parts) != 2:
        raise ConfigError(f"config key must look like block.field, got {dotted!r}")
    block_name, field_name = parts
    block = getattr(cfg, block_name, None)
    if block is None or not dataclasses.is_dataclass(block):
        raise ConfigError(f"unknown config block {block_name!r}")
    fields = {f.name: f for f in dataclasses.fields(block)}
    if field_name not in fields:
        raise ConfigError(f"unknown field {field_name!r} in block {block_name!r}")
    try:
        setattr(block, field_name, _coerce(value, fields[field_name].type, dotted))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {dotted}: {value!r}") from exc


def from_dict(data: dict) -> SweepConfig:
    cfg = SweepConfig()
    for block_name, block in data.items():
        if not isinstance(block, dict):
            raise ConfigError(f"top-level entry {block_name!r} must be a table")
        for key, value in block.items():
            _set(cfg, f"{block_name}.{key}", value)
    return cfg


def load_config(path=None, overrides=()) -> SweepConfig:
    """Read a TOML file (optional) and apply ``block.field=value`` overrides in order."""
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    cfg = from_dict(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, text = item.split("=", 1)
        _set(cfg, key.strip(), _parse_scalar(text.strip()))
    check(cfg)
    return cfg


def check(cfg: SweepConfig, u_max: float | None = None) -> list[str]:
    """Raise ConfigError on invalid settings; return advisory warnings.

    ``u_max`` replaces the grid's largest U for single-point runs.
    """
    g, p, dyn, lat = cfg.grid, cfg.params, cfg.dynamics, cfg.lattice
    if lat.d not in (1, 2):
        raise ConfigError("lattice.d must be 1 or 2")
    try:
        cfg.spec()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if g.mode not in ("map", "slice"):
        raise ConfigError("grid.mode must be 'map' or 'slice'")
    if p.sector_mode not in ("fixed", "global"):
        raise ConfigError("params.sector_mode must be 'fixed' or 'global'")
    for name in ("mu_steps", "kappa_steps", "u_steps"):
        if getattr(g, name) < 1:
            raise ConfigError(f"grid.{name} must be >= 1")
    if g.mode == "map" and g.kappa_min <= 0:
        raise ConfigError("grid.kappa_min must be > 0 (U = kappa / (kappa/U))")
    if g.mode == "slice" and g.u_min <= 0:
        raise ConfigError("grid.u_min must be > 0")
    if g.mu_max < g.mu_min or g.kappa_max < g.kappa_min or g.u_max < g.u_min:
        raise ConfigError("grid ranges must be ordered min <= max")
    if p.n_max < 1 or p.n_total < 0:
        raise ConfigError("params.n_max must be >= 1 and params.n_total >= 0")
    if p.n_total > p.n_max * 2 * lat.n:
        raise ConfigError("params.n_total exceeds n_max times the number of sites")
    if p.g < 0 or p.lam < 0:
        raise ConfigError("params.g and params.lam must be >= 0")
    if p.delta_mu <= 0:
        raise ConfigError("params.delta_mu must be > 0")
    if dyn.samples_per_period < 4 or dyn.tau_delta_mu <= 0 or dyn.omega_step <= 0:
        raise ConfigError("dynamics block: need samples_per_period >= 4, tau_delta_mu > 0, omega_step > 0")
    if cfg.output.workers < 1:
        raise ConfigError("output.workers must be >= 1")

    warnings = []
    if u_max is None:
        u_max = g.u_max if g.mode == "slice" else p.kappa / g.kappa_min
    if p.delta_mu < 10 * max(u_max, p.kappa):
        warnings.append(f"quench delta_mu={p.delta_mu} is not >> max(U, kappa)={max(u_max, p.kappa):.3g}")
    return warnings


def dump_toml(cfg: SweepConfig) -> str:
    lines = []
    for block_name, block in cfg.to_dict().items():
        lines.append(f"[{block_name}]")
        for key, value in block.items():
            if isinstance(value, str):
                lines.append(f'{key} = "{value}"')
            elif isinstance(value, list):
                lines.append(f"{key} = [" + ", ".join(f'"{v}"' for v in value) + "]")
            elif isinstance(value, bool):
                lines.append(f"{key} = {str(value).lower()}")
            else:
                lines.append(f"{key} = {value!r}")
        lines.append("")
    return "\n".join(lines)
