"""Run configuration: a flat key set read from YAML (or a run manifest)."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml


class ConfigError(ValueError):
    pass


CASES = ("case1", "case2", "case3", "case4", "custom")
REDUCTION_METHODS = ("backward", "kmeans", "none")
SOLVE_METHODS = ("monolithic", "benders", "oracle")
PROFILES = ("industrial-park-default",)


@dataclass
class RunConfig:
    # paths
    year_path: str | None = None
    catalog_path: str | None = None
    output_dir: str = "out"
    # synthetic year, used when year_path is unset
    synth_seed: int = 0
    synth_profile: str = "industrial-park-default"
    tariff_peak: float = 850.0
    tariff_valley: float = 350.0
    # risk
    alpha: float = 0.95
    beta: float = 0.5
    sweep_alphas: list[float] = field(default_factory=lambda: [0.9, 0.95, 0.99])
    sweep_betas: list[float] = field(default_factory=lambda: [0.1, 0.5, 0.9])
    # scenario reduction
    reduction_method: str = "backward"
    reduction_target: int = 30
    reduction_seed: int = 0
    normalize_features: bool = True
    ladder_targets: list[int] = field(default_factory=lambda: [10, 30, 50, 100])
    ladder_methods: list[str] = field(default_factory=lambda: ["backward", "kmeans"])
    # solve
    solve_method: str = "benders"
    gap: float = 1e-4
    time_limit: float | None = None
    max_iter: int = 200
    lp_warmup: int = 100  # relaxed-master Benders rounds before branching
    # physics and economics
    gas_price_per_m3: float = 3.4
    gas_heating_value: float = 10.0  # kWh per m3
    discount_rate: float = 0.08
    lifetime_converter: int = 20
    lifetime_ess: int = 10
    lifetime_res: int = 20
    res_penetration_cap: float = 0.5
    shed_cost_e: float = 2000.0
    shed_cost_h: float = 1800.0
    shed_cost_c: float = 1800.0
    dt: float = 1.0
    steps_per_day: int = 24
    days_per_year: float = 365.0
    max_modules_res: int = 100
    max_modules_ess: int = 100
    case: str = "case4"

    def validate(self) -> "RunConfig":
        for key in ("year_path", "catalog_path"):
            p = getattr(self, key)
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"{key}: no such file {p!r}")
        if not 0 <= self.alpha < 1 or any(not 0 <= a < 1 for a in self.sweep_alphas):
            raise ConfigError("alpha values must lie in [0, 1)")
        if not 0 <= self.beta <= 1 or any(not 0 <= b <= 1 for b in self.sweep_betas):
            raise ConfigError("beta values must lie in [0, 1]")
        _choice("case", self.case, CASES)
        _choice("reduction_method", self.reduction_method, REDUCTION_METHODS)
        _choice("solve_method", self.solve_method, SOLVE_METHODS)
        _choice("synth_profile", self.synth_profile, PROFILES)
        for m in self.ladder_methods:
            _choice("ladder_methods", m, ("backward", "kmeans"))
        if self.reduction_target < 1 or any(t < 1 for t in self.ladder_targets):
            raise ConfigError("reduction targets must be positive")
        if self.gap <= 0 or self.max_iter < 1 or self.lp_warmup < 0:
            raise ConfigError("gap must be positive, max_iter at least 1 and lp_warmup nonnegative")
        if self.gas_heating_value <= 0 or self.dt <= 0 or self.steps_per_day < 1:
            raise ConfigError("heating value, dt and steps_per_day must be positive")
        if not 0 < self.discount_rate < 1 or not 0 <= self.res_penetration_cap <= 1:
            raise ConfigError("discount_rate must lie in (0, 1) and res_penetration_cap in [0, 1]")
        if min(self.lifetime_converter, self.lifetime_ess, self.lifetime_res) < 1:
            raise ConfigError("lifetimes must be at least one year")
        if min(self.max_modules_res, self.max_modules_ess) < 0:
            raise ConfigError("module caps must be nonnegative")
        return self

    @property
    def gas_price(self) -> float:
        """RMB per MWh of gas."""
        return self.gas_price_per_m3 / self.gas_heating_value * 1000.0

    @property
    def shed_cost(self) -> tuple[float, float, float]:
        return (self.shed_cost_e, self.shed_cost_h, self.shed_cost_c)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _choice(key: str, value: str, allowed) -> None:
    if value not in allowed:
        raise ConfigError(f"{key}={value!r}; expected one of {', '.join(allowed)}")


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value):
    kind = _TYPES[key]
    if value is None:
        return None
    try:
        if kind.startswith("list[int]"):
            return [int(v) for v in _listify(value)]
        if kind.startswith("list[float]"):
            return [float(v) for v in _listify(value)]
        if kind.startswith("list[str]"):
            return [str(v) for v in _listify(value)]
        if kind == "bool":
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if kind == "int":
            return int(value)
        if kind.startswith("float"):
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot read {value!r} as {kind}") from exc


def _listify(value):
    if isinstance(value, str):
        return [v for v in value.replace(",", " ").split() if v]
    if isinstance(value, (list, tuple)):
        return value
    return [value]


def config_from_mapping(data: dict, base: RunConfig | None = None) -> RunConfig:
    unknown = sorted(set(data) - set(_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    values = (base or RunConfig()).to_dict()
    values.update({k: _coerce(k, v) for k, v in data.items()})
    return RunConfig(**values)


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Read a YAML config, or the ``config`` section of a run manifest,
    apply ``overrides`` (e.g. from command-line flags) and validate."""
    data: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            text = p.read_text()
            data = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
        except (yaml.YAMLError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{p}: {exc}") from exc
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{p}: expected a mapping of keys")
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
    cfg = config_from_mapping(data)
    if overrides:
        cfg = config_from_mapping({k: v for k, v in overrides.items() if v is not None}, cfg)
    return cfg.validate()
