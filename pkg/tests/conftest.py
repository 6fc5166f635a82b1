import numpy as np
import pytest

from ehplan.generators import ess_module, pv_module, wind_module
from ehplan.model import DeviceKind, DeviceOption, EhInstance, Scenario
from ehplan.scenarios import ScenarioSet


def device(kind, cid="a", cap=1.0, cost=1e5, lam=1.0, coupling=None, rating=None):
    defaults = {
        DeviceKind.CCHP: ((0.0, 0.35), (0.0, 0.4), (0.0, 0.2)),
        DeviceKind.GB: ((0.0, 0.0), (0.0, 0.9), (0.0, 0.0)),
        DeviceKind.AC: ((0.0, 0.0), (0.0, 0.0), (1.2, 0.0)),
        DeviceKind.TX: ((0.98, 0.0), (0.0, 0.0), (0.0, 0.0)),
    }
    c = np.array(coupling or defaults[kind])
    rating = cap / c.max() if rating is None else rating
    gas = bool(c[:, 1].any())
    return DeviceOption(kind=kind, capacity_id=cid, capacity_mw=cap, invest_cost=cost, maintenance_rate=lam,
                        lifetime_years=20, max_input_e=0.0 if gas else rating,
                        max_input_g=rating if gas else 0.0, coupling=tuple(map(tuple, c)))


def scenario(steps=2, prob=1.0, e=1.0, h=0.5, c=0.5, wind=8.0, irr=500.0, price=500.0):
    full = lambda v: np.full(steps, v, dtype=float)
    return Scenario(prob=prob, load_e=full(e), load_h=full(h), load_c=full(c),
                    wind_speed=full(wind), irradiance=full(irr), price_e=full(price))


def basic_devices():
    return (
        device(DeviceKind.CCHP, "c1", 1.0, 9e6, 1.5),
        device(DeviceKind.GB, "g1", 2.0, 8e5, 10.0),
        device(DeviceKind.AC, "a1", 2.0, 1.5e6, 2.0),
        device(DeviceKind.TX, "t1", 3.0, 3e5, 10.0),
    )


def toy_set(values, probs=None):
    """Single-step scenarios carrying ``values`` on the electric load only."""
    probs = probs if probs is not None else [1.0 / len(values)] * len(values)
    z = [0.0]
    return ScenarioSet(
        tuple(Scenario(prob=p, load_e=[v], load_h=z, load_c=z, wind_speed=z, irradiance=z, price_e=z)
              for v, p in zip(values, probs)),
        tuple(range(len(values))),
    )


@pytest.fixture
def small_instance():
    return EhInstance(
        devices=basic_devices(),
        res_options=(wind_module(3), pv_module(3)),
        ess_options=(ess_module("BESS", 3), ess_module("HESS", 3)),
        scenarios=(scenario(4, 0.6), scenario(4, 0.4, e=2.0, h=1.0, c=1.0, price=800.0)),
        dt=6.0,
    )


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
