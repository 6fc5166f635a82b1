import math

import numpy as np
import pytest

from ehplan.generators import pv_module, wind_module
from ehplan.model import ModelError, annualization_coefficient, pv_power_max, res_availability, wind_power_max
from ehplan.model.types import ResModuleSpec

from conftest import scenario


@pytest.mark.parametrize(
    "dr, years, expected, tol",
    [(0.08, 20, 0.101852, 1e-6), (0.08, 1, 1.08, 1e-9), (1e-9, 10, 0.1, 1e-6)],
)
def test_annualization_values(dr, years, expected, tol):
    assert annualization_coefficient(dr, years) == pytest.approx(expected, abs=tol)


def test_annualization_range():
    for dr in (0.01, 0.08, 0.3):
        for years in (1, 5, 30):
            k = annualization_coefficient(dr, years)
            assert dr < k <= 1 + dr + 1e-12


@pytest.mark.parametrize("dr, years", [(0.0, 10), (-0.1, 10), (0.08, 0), (0.08, -3)])
def test_annualization_domain(dr, years):
    with pytest.raises(ModelError):
        annualization_coefficient(dr, years)


def test_wind_curve():
    wt = wind_module()
    assert wt.swept_area == pytest.approx(math.pi * 1600)
    assert wind_power_max(wt, 1.0) == 0.0
    assert wind_power_max(wt, 30.0) == 0.0
    assert wind_power_max(wt, 25.0) == 0.0
    assert wind_power_max(wt, 12.0) == pytest.approx(1.6807, abs=1e-3)
    assert wind_power_max(wt, 18.0) == wind_power_max(wt, 12.0)
    v = np.linspace(0, 30, 61)
    assert np.all(np.diff(wind_power_max(wt, v)[v < 25]) >= 0)


def test_pv_output():
    spec = ResModuleSpec(kind="PV", name="p", invest_cost=0, maintenance_rate=0, rated_power=0,
                         panel_area=10.0, panel_eff=0.2, mppt_eff=0.97, tilt_angle=38.0)
    assert pv_power_max(spec, 0.0) == 0.0
    assert pv_power_max(spec, 1000.0) == pytest.approx(1.5287e-3, abs=1e-6)
    flat = ResModuleSpec(**{**spec.__dict__, "tilt_angle": 90.0})
    assert abs(pv_power_max(flat, 800.0)) < 1e-12


def test_kind_mismatch():
    with pytest.raises(ModelError):
        wind_power_max(pv_module(), 10.0)
    with pytest.raises(ModelError):
        pv_power_max(wind_module(), 500.0)


def test_availability_per_scenario():
    sc = scenario(3, wind=12.0, irr=1000.0)
    assert np.allclose(res_availability(wind_module(), sc), wind_power_max(wind_module(), 12.0))
    assert np.allclose(res_availability(pv_module(), sc), pv_power_max(pv_module(), 1000.0))
