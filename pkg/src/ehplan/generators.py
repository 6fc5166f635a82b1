"""Seeded random instances for cross-checking solve paths.

``tiny`` instances are small enough for exhaustive enumeration;
``medium`` instances have ten full days and exercise decomposition.
"""

from __future__ import annotations

import numpy as np

from .model.physics import pv_power_max, wind_power_max
from .model.types import (
    DeviceKind,
    DeviceOption,
    EhInstance,
    EssKind,
    EssModuleSpec,
    ResKind,
    ResModuleSpec,
    Scenario,
)

_COUPLING = {
    DeviceKind.CCHP: lambda rng: ((0.0, rng.uniform(0.30, 0.40)), (0.0, rng.uniform(0.30, 0.40)), (0.0, rng.uniform(0.15, 0.30))),
    DeviceKind.GB: lambda rng: ((0.0, 0.0), (0.0, rng.uniform(0.85, 0.95)), (0.0, 0.0)),
    DeviceKind.AC: lambda rng: ((0.0, 0.0), (0.0, 0.0), (rng.uniform(1.2, 2.0), 0.0)),
    DeviceKind.TX: lambda rng: ((rng.uniform(0.96, 0.99), 0.0), (0.0, 0.0), (0.0, 0.0)),
}
# invest cost per MW (RMB) and maintenance per MWh, in the spirit of the reference catalog
_COSTS = {
    DeviceKind.CCHP: (900e4, 1.5),
    DeviceKind.GB: (80e4, 10.0),
    DeviceKind.AC: (150e4, 2.0),
    DeviceKind.TX: (30e4, 10.0),
}
_ESS_COSTS = {EssKind.BESS: (90e4, 90.0), EssKind.HESS: (9e4, 9.0), EssKind.CESS: (19e4, 19.0)}


def _device(rng, kind: DeviceKind, j: int, scale: float) -> DeviceOption:
    coupling = _COUPLING[kind](rng)
    cap = round(float(rng.uniform(0.4, 1.2) * scale), 3)
    c = np.asarray(coupling)
    main = c.max()
    # the input rating that delivers the nominal capacity on the main output
    rating = cap / main
    uses_gas = c[:, 1].any()
    inv, lam = _COSTS[kind]
    return DeviceOption(
        kind=kind, capacity_id=f"{kind.value.lower()}{j}", capacity_mw=cap,
        invest_cost=inv * float(rng.uniform(0.8, 1.2)), maintenance_rate=lam,
        lifetime_years=20, max_input_e=0.0 if uses_gas else rating,
        max_input_g=rating if uses_gas else 0.0, coupling=coupling,
    )


def wind_module(max_modules: int = 100, name: str = "WT") -> ResModuleSpec:
    base = ResModuleSpec(
        kind=ResKind.WT, name=name, invest_cost=0.0, maintenance_rate=120.0, rated_power=0.0,
        max_modules=max_modules, lifetime_years=20, cut_in=2.5, rated_speed=12.0, cut_out=25.0,
        swept_area=float(np.pi * 40.0**2), conversion_eff=0.3, air_density=1.29,
    )
    rated = wind_power_max(base, 12.0)
    return ResModuleSpec(**{**base.__dict__, "rated_power": rated, "invest_cost": 350e4 * rated})


def pv_module(max_modules: int = 100, name: str = "PV", panel_area: float = 1000.0) -> ResModuleSpec:
    base = ResModuleSpec(
        kind=ResKind.PV, name=name, invest_cost=0.0, maintenance_rate=625.0, rated_power=0.0,
        max_modules=max_modules, lifetime_years=20, panel_area=panel_area, panel_eff=0.2,
        mppt_eff=0.97, tilt_angle=38.0,
    )
    rated = pv_power_max(base, 1000.0)
    return ResModuleSpec(**{**base.__dict__, "rated_power": rated, "invest_cost": 600e4 * rated})


def ess_module(kind: EssKind, max_modules: int = 100, energy: float = 1.0, name: str | None = None) -> EssModuleSpec:
    inv, lam = _ESS_COSTS[EssKind(kind)]
    return EssModuleSpec(
        kind=kind, name=name or EssKind(kind).value, energy_per_module=energy,
        invest_cost=inv * energy, maintenance_rate=lam, eta_ch=0.95, eta_dis=0.95,
        max_modules=max_modules, lifetime_years=10,
    )


def _day(rng, steps: int, scale: float, prob: float, label: str) -> Scenario:
    hours = np.arange(steps) * (24.0 / steps)
    shape = 0.7 + 0.3 * np.sin((hours - 8.0) / 24.0 * 2 * np.pi)
    sun = np.clip(np.sin((hours - 6.0) / 12.0 * np.pi), 0.0, None)
    price = np.where((hours >= 23) | (hours < 7), 350.0, 850.0)
    return Scenario(
        prob=prob,
        load_e=scale * shape * rng.uniform(0.6, 1.2, steps),
        load_h=scale * rng.uniform(0.2, 0.9) * rng.uniform(0.6, 1.2, steps),
        load_c=scale * rng.uniform(0.2, 0.9) * shape * rng.uniform(0.6, 1.2, steps),
        wind_speed=rng.uniform(0.0, 16.0, steps),
        irradiance=900.0 * sun * rng.uniform(0.3, 1.0, steps),
        price_e=price,
        label=label,
    )


def random_instance(seed: int, size: str = "tiny") -> EhInstance:
    """A seeded instance of the requested size.

    tiny: at most 2 scenarios x 6 steps, at most 2 options per converter
    kind, at most one storage and one renewable option, each capped at 2
    modules. medium: 10 scenarios x 24 steps, 2 options per kind, all
    storage kinds.
    """
    rng = np.random.default_rng(seed)
    if size == "tiny":
        S = int(rng.integers(1, 3))
        T = int(rng.integers(4, 7))
        n_opts = {k: int(rng.integers(1, 3)) for k in DeviceKind}
        ess_kinds = [EssKind(rng.choice([k.value for k in EssKind]))] if rng.random() < 0.7 else []
        res_kinds = [ResKind(rng.choice([k.value for k in ResKind]))] if rng.random() < 0.6 else []
        cap = 2
        scale = 2.0
    elif size == "medium":
        S, T = 10, 24
        n_opts = {k: 2 for k in DeviceKind}
        ess_kinds = list(EssKind)
        res_kinds = list(ResKind)
        cap = 20
        scale = 8.0
    else:
        raise ValueError(f"unknown size {size!r}")
    devices = []
    for kind, n in n_opts.items():
        unit = {DeviceKind.CCHP: 0.4, DeviceKind.GB: 0.6, DeviceKind.AC: 0.6, DeviceKind.TX: 1.0}[kind]
        for j in range(n):
            devices.append(_device(rng, kind, j, scale * unit * (1 + j)))
    ess_energy = 1.0 if size == "medium" else 0.5
    ess = [ess_module(k, cap, energy=ess_energy) for k in ess_kinds]
    res = []
    for k in res_kinds:
        res.append(wind_module(cap) if k is ResKind.WT else pv_module(cap, panel_area=2000.0))
    w = rng.uniform(0.5, 1.5, S)
    probs = w / w.sum()
    probs[-1] = 1.0 - probs[:-1].sum()
    scenarios = [_day(rng, T, scale, float(p), f"{size}{seed}-{s}") for s, p in enumerate(probs)]
    return EhInstance(
        devices=tuple(devices), res_options=tuple(res), ess_options=tuple(ess),
        scenarios=tuple(scenarios), gas_price=340.0, shed_cost=(2000.0, 1800.0, 1800.0),
        res_penetration_cap=float(rng.choice([0.3, 0.5])), discount_rate=0.08,
        days_per_year=365.0, dt=24.0 / T,
    )
