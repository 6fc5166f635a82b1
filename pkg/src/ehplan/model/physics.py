"""Amortization and renewable output curves."""

from __future__ import annotations

import numpy as np

from .types import ModelError, ResKind, ResModuleSpec

W_PER_MW = 1e6


def annualization_coefficient(dr: float, T: float) -> float:
    """Capital recovery factor ``dr (1+dr)^T / ((1+dr)^T - 1)``.

    >>> round(annualization_coefficient(0.08, 1), 9)
    1.08
    """
    if not dr > 0:
        raise ModelError(f"discount rate must be positive, got {dr}")
    if not T >= 1:
        raise ModelError(f"lifetime must be at least one year, got {T}")
    # expm1/log1p keep the ratio accurate when dr is tiny
    growth_minus_one = np.expm1(T * np.log1p(dr))
    return float(dr * (growth_minus_one + 1.0) / growth_minus_one)


def _require(spec: ResModuleSpec, kind: ResKind) -> None:
    if ResKind(spec.kind) is not kind:
        raise ModelError(f"{spec.name} is a {spec.kind.value} module, expected {kind.value}")


def wind_power_max(spec: ResModuleSpec, wind_speed):
    """Available output of one wind module in MW.

    Accepts a scalar or an array of speeds; returns the same shape.
    """
    _require(spec, ResKind.WT)
    v = np.asarray(wind_speed, dtype=float)
    if np.any(v < 0):
        raise ModelError("wind speed must be nonnegative")
    k = 0.5 * spec.air_density * spec.swept_area * spec.conversion_eff / W_PER_MW
    out = np.where(v < spec.rated_speed, k * v**3, k * spec.rated_speed**3)
    out = np.where((v < spec.cut_in) | (v >= spec.cut_out), 0.0, out)
    return float(out) if out.ndim == 0 else out


def pv_power_max(spec: ResModuleSpec, irradiance):
    """Available output of one PV module in MW for irradiance in W/m^2."""
    _require(spec, ResKind.PV)
    h = np.asarray(irradiance, dtype=float)
    if np.any(h < 0):
        raise ModelError("irradiance must be nonnegative")
    k = np.cos(np.deg2rad(spec.tilt_angle)) * spec.panel_area * spec.mppt_eff * spec.panel_eff
    out = np.maximum(h * k / W_PER_MW, 0.0)
    return float(out) if out.ndim == 0 else out


def res_availability(spec: ResModuleSpec, scenario) -> np.ndarray:
    """Per-module available output over the steps of ``scenario``."""
    if ResKind(spec.kind) is ResKind.WT:
        return np.atleast_1d(wind_power_max(spec, scenario.wind_speed))
    return np.atleast_1d(pv_power_max(spec, scenario.irradiance))
