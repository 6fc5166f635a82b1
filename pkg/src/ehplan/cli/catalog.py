"""Candidate catalogs and instance assembly, including the case presets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from ..model import (
    DeviceOption,
    EhInstance,
    EssModuleSpec,
    ModelError,
    ResKind,
    ResModuleSpec,
    pv_power_max,
    wind_power_max,
)
from ..scenarios import ScenarioSet
from .config import ConfigError, RunConfig

# which candidate families each preset keeps: (RES, ESS)
CASE_PRESETS = {
    "case1": (False, False),
    "case2": (True, False),
    "case3": (False, True),
    "case4": (True, True),
    "custom": (True, True),
}

STC_IRRADIANCE = 1000.0


@dataclass(frozen=True)
class Catalog:
    devices: tuple[DeviceOption, ...]
    res: tuple[ResModuleSpec, ...]
    ess: tuple[EssModuleSpec, ...]


def default_catalog_text() -> str:
    return resources.files("ehplan.cli").joinpath("data/catalog.yaml").read_text()


def load_catalog(cfg: RunConfig) -> Catalog:
    text = Path(cfg.catalog_path).read_text() if cfg.catalog_path else default_catalog_text()
    try:
        data = yaml.safe_load(text)
        return parse_catalog(data, cfg)
    except (yaml.YAMLError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"catalog: {exc}") from exc


def parse_catalog(data: dict, cfg: RunConfig) -> Catalog:
    coupling = data.get("coupling", {})
    devices = []
    for rec in data["devices"]:
        rec = dict(rec)
        kind = rec["kind"]
        c = np.asarray(rec.pop("coupling", coupling[kind]), dtype=float)
        rec.setdefault("lifetime_years", cfg.lifetime_converter)
        if "max_input_e" not in rec and "max_input_g" not in rec:
            rating = rec["capacity_mw"] / c.max()
            gas = bool(c[:, 1].any())
            rec["max_input_e"] = 0.0 if gas else rating
            rec["max_input_g"] = rating if gas else 0.0
        devices.append(DeviceOption(coupling=tuple(map(tuple, c)), **rec))
    res = []
    for rec in data.get("res", []):
        rec = dict(rec)
        per_mw = rec.pop("invest_cost_per_mw", None)
        rec.setdefault("lifetime_years", cfg.lifetime_res)
        rec.setdefault("max_modules", cfg.max_modules_res)
        if ResKind(rec["kind"]) is ResKind.WT and "blade_length" in rec:
            rec["swept_area"] = math.pi * rec.pop("blade_length") ** 2
        rec.setdefault("rated_power", 0.0)
        rec.setdefault("invest_cost", 0.0)
        spec = ResModuleSpec(**rec)
        if spec.rated_power == 0.0:
            rated = (wind_power_max(spec, spec.rated_speed) if spec.kind is ResKind.WT
                     else pv_power_max(spec, STC_IRRADIANCE))
            rec["rated_power"] = float(rated)
        if per_mw is not None:
            rec["invest_cost"] = per_mw * rec["rated_power"]
        res.append(ResModuleSpec(**rec))
    ess = []
    for rec in data.get("ess", []):
        rec = dict(rec)
        rec.setdefault("lifetime_years", cfg.lifetime_ess)
        rec.setdefault("max_modules", cfg.max_modules_ess)
        ess.append(EssModuleSpec(**rec))
    return Catalog(tuple(devices), tuple(res), tuple(ess))


def build_instance(cfg: RunConfig, catalog: Catalog, sset: ScenarioSet, case: str | None = None) -> EhInstance:
    """The planning instance for ``sset`` under a case preset."""
    keep_res, keep_ess = CASE_PRESETS[case or cfg.case]
    try:
        return EhInstance(
            devices=catalog.devices,
            res_options=catalog.res if keep_res else (),
            ess_options=catalog.ess if keep_ess else (),
            scenarios=sset.scenarios,
            gas_price=cfg.gas_price,
            shed_cost=cfg.shed_cost,
            res_penetration_cap=cfg.res_penetration_cap,
            discount_rate=cfg.discount_rate,
            days_per_year=cfg.days_per_year,
            dt=cfg.dt,
        )
    except ModelError as exc:
        raise ConfigError(f"instance: {exc}") from exc
