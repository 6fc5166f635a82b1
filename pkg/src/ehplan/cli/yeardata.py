"""Year CSV reading and writing, and the synthetic year generator."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..scenarios import ReductionError, YearSeries

YEAR_HEADER = ("hour", "load_e_mw", "load_h_mw", "load_c_mw", "wind_mps", "irradiance_wpm2", "price_e_rmb_per_mwh")
_FIELDS = ("load_e", "load_h", "load_c", "wind_speed", "irradiance", "price_e")
LATITUDE_DEG = 38.0


class DataError(ValueError):
    pass


def ingest_year(path: str | Path, steps_per_day: int = 24) -> YearSeries:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"year file not found: {path}")
    cols: list[list[float]] = [[] for _ in _FIELDS]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != YEAR_HEADER:
            raise DataError(f"{path}:1: header must be {','.join(YEAR_HEADER)}")
        for row in reader:
            line = reader.line_num
            if len(row) != len(YEAR_HEADER):
                raise DataError(f"{path}:{line}: expected {len(YEAR_HEADER)} fields, got {len(row)}")
            try:
                hour = int(row[0])
                vals = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise DataError(f"{path}:{line}: {exc}") from exc
            if hour != len(cols[0]):
                raise DataError(f"{path}:{line}: hour {hour} out of sequence")
            if not all(math.isfinite(v) for v in vals):
                raise DataError(f"{path}:{line}: non-finite value")
            for name, v in zip(YEAR_HEADER[1:6], vals[:5]):
                if v < 0:
                    raise DataError(f"{path}:{line}: {name} is negative ({v})")
            for c, v in zip(cols, vals):
                c.append(v)
    if not cols[0]:
        raise DataError(f"{path}: no data rows")
    try:
        return YearSeries(*[np.array(c) for c in cols], steps_per_day=steps_per_day)
    except ReductionError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_year(year: YearSeries, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(YEAR_HEADER) + "\n")
        data = np.column_stack([getattr(year, f) for f in _FIELDS])
        for h, row in enumerate(data):
            fh.write(f"{h}," + ",".join(f"{v:.6f}" for v in row) + "\n")


def solar_elevation_sin(day: np.ndarray, hour: np.ndarray, latitude_deg: float = LATITUDE_DEG) -> np.ndarray:
    """Sine of solar elevation at the middle of ``hour`` (local solar time)."""
    decl = np.radians(23.44) * np.sin(2 * np.pi * (284 + day + 1) / 365.0)
    ha = np.radians(15.0 * (hour + 0.5 - 12.0))
    lat = np.radians(latitude_deg)
    return np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(ha)


def synth_year(seed: int, profile: str = "industrial-park-default", *, days: int = 365,
               tariff_peak: float = 850.0, tariff_valley: float = 350.0) -> YearSeries:
    """A deterministic synthetic year of hourly data.

    Loads combine a seasonal sinusoid, a daily shape and seeded noise
    (including a day-level factor so some days are markedly harsher than
    others); irradiance follows the sun at 38 degrees north scaled by a
    daily clearness index; wind is a first-order autoregressive process.
    """
    if profile != "industrial-park-default":
        from .config import ConfigError

        raise ConfigError(f"unknown synthetic profile {profile!r}")
    rng = np.random.default_rng(seed)
    n = days * 24
    day = np.repeat(np.arange(days), 24)
    hour = np.tile(np.arange(24), days)
    season = np.cos(2 * np.pi * (day - 15) / 365.0)  # +1 mid-January, -1 mid-July

    work = np.clip(np.sin(np.pi * (hour - 6) / 14.0), 0.0, None)  # 06:00-20:00 shift
    day_factor = np.repeat(rng.lognormal(0.0, 0.12, days), 24)
    noise = lambda s: rng.normal(1.0, s, n).clip(0.5, 1.5)
    load_e = (9.0 + 7.0 * work + 1.5 * np.abs(season)) * day_factor * noise(0.05)
    heat_base = np.clip(10.0 * season + 4.0, 1.0, None)
    load_h = heat_base * (1.0 + 0.25 * np.cos(2 * np.pi * (hour - 4) / 24.0)) * day_factor * noise(0.06)
    cool_base = np.clip(-12.0 * season + 2.0, 0.5, None)
    load_c = cool_base * (0.6 + 0.6 * work) * day_factor * noise(0.06)

    elev = solar_elevation_sin(day, hour)
    clearness = np.repeat(rng.beta(5.0, 2.0, days), 24)
    irradiance = np.where(elev > 0, 1000.0 * elev * clearness, 0.0)

    phi = 0.9
    eps = rng.normal(0.0, math.sqrt(1 - phi**2), n)
    w = np.empty(n)
    w[0] = eps[0]
    for t in range(1, n):
        w[t] = phi * w[t - 1] + eps[t]
    wind = np.clip(6.5 + 0.8 * season + 3.0 * w, 0.0, 30.0)

    price = np.where((hour >= 23) | (hour < 7), tariff_valley, tariff_peak).astype(float)
    # round to the precision the CSV carries so that a round trip is exact
    r = lambda a: np.round(a, 6)
    return YearSeries(r(load_e), r(load_h), r(load_c), r(wind), r(irradiance), r(price))
