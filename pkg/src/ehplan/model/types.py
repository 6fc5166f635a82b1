"""Domain types for energy hub planning.

Every value type is immutable after construction. Series carried by
:class:`Scenario` are stored as read-only float arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


class ModelError(ValueError):
    """Raised when an instance or solution violates a structural rule."""


class InfeasibleModelError(ModelError):
    """Raised when the formulation is infeasible by construction."""


class DeviceKind(str, enum.Enum):
    CCHP = "CCHP"
    GB = "GB"
    AC = "AC"
    TX = "TX"


class ResKind(str, enum.Enum):
    WT = "WT"
    PV = "PV"


class EssKind(str, enum.Enum):
    BESS = "BESS"
    HESS = "HESS"
    CESS = "CESS"


CARRIERS_OUT = ("e", "h", "c")
CARRIERS_IN = ("e", "g")

# storage kind -> index of the output carrier it serves
ESS_CARRIER = {EssKind.BESS: 0, EssKind.HESS: 1, EssKind.CESS: 2}


def _frozen(values, name: str, *, nonneg: bool = False) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ModelError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} contains non-finite values")
    if nonneg and np.any(arr < 0):
        raise ModelError(f"{name} must be nonnegative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DeviceOption:
    """One capacity option of an energy converter.

    ``coupling`` maps the input vector ``(e, g)`` to outputs ``(e, h, c)``.
    Investment for the option is ``invest_cost * capacity_mw``.
    """

    kind: DeviceKind
    capacity_id: str
    capacity_mw: float
    invest_cost: float
    maintenance_rate: float
    lifetime_years: int
    max_input_e: float
    max_input_g: float
    coupling: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", DeviceKind(self.kind))
        c = np.asarray(self.coupling, dtype=float)
        if c.shape != (3, 2):
            raise ModelError(f"{self.key}: coupling must be 3x2, got {c.shape}")
        if np.any(c < 0) or np.any(c > 2):
            raise ModelError(f"{self.key}: coupling entries must lie in [0, 2]")
        object.__setattr__(self, "coupling", tuple(tuple(float(x) for x in row) for row in c))
        if self.invest_cost < 0 or self.maintenance_rate < 0:
            raise ModelError(f"{self.key}: costs must be nonnegative")
        if self.lifetime_years < 1:
            raise ModelError(f"{self.key}: lifetime must be at least one year")
        if self.max_input_e < 0 or self.max_input_g < 0 or self.capacity_mw < 0:
            raise ModelError(f"{self.key}: capacities must be nonnegative")
        if self.kind in (DeviceKind.GB, DeviceKind.AC):
            # single-carrier converters: the unused input column must be inert
            col = 1 if self.kind is DeviceKind.GB else 0
            other = 1 - col
            if np.any(c[:, other] != 0) or (self.max_input_e, self.max_input_g)[other] != 0:
                raise ModelError(f"{self.key}: {self.kind.value} uses a single input carrier")

    @property
    def key(self) -> tuple[str, str]:
        return (DeviceKind(self.kind).value, self.capacity_id)

    @property
    def investment(self) -> float:
        return self.invest_cost * self.capacity_mw

    @property
    def max_input(self) -> tuple[float, float]:
        return (self.max_input_e, self.max_input_g)

    @property
    def coupling_matrix(self) -> np.ndarray:
        return np.asarray(self.coupling, dtype=float)


@dataclass(frozen=True)
class ResModuleSpec:
    """A renewable module type. WT-only and PV-only fields may stay ``None``
    for the other kind."""

    kind: ResKind
    name: str
    invest_cost: float  # per module
    maintenance_rate: float
    rated_power: float  # MW per module
    max_modules: int = 100
    lifetime_years: int = 20
    cut_in: float | None = None
    rated_speed: float | None = None
    cut_out: float | None = None
    swept_area: float | None = None
    conversion_eff: float | None = None
    air_density: float | None = None
    panel_area: float | None = None
    panel_eff: float | None = None
    mppt_eff: float | None = None
    tilt_angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ResKind(self.kind))
        if self.invest_cost < 0 or self.maintenance_rate < 0 or self.rated_power < 0:
            raise ModelError(f"{self.name}: costs and rating must be nonnegative")
        if self.max_modules < 0 or self.lifetime_years < 1:
            raise ModelError(f"{self.name}: bad module cap or lifetime")
        if self.kind is ResKind.WT:
            need = (self.cut_in, self.rated_speed, self.cut_out, self.swept_area,
                    self.conversion_eff, self.air_density)
            if any(v is None for v in need):
                raise ModelError(f"{self.name}: WT parameters incomplete")
            if not 0 < self.cut_in < self.rated_speed < self.cut_out:
                raise ModelError(f"{self.name}: need 0 < cut_in < rated < cut_out")
            if not 0 < self.conversion_eff <= 1 or self.swept_area <= 0 or self.air_density <= 0:
                raise ModelError(f"{self.name}: bad WT efficiency, area or density")
        else:
            need = (self.panel_area, self.panel_eff, self.mppt_eff, self.tilt_angle)
            if any(v is None for v in need):
                raise ModelError(f"{self.name}: PV parameters incomplete")
            if self.panel_area <= 0 or not 0 < self.panel_eff <= 1 or not 0 < self.mppt_eff <= 1:
                raise ModelError(f"{self.name}: bad PV area or efficiency")


@dataclass(frozen=True)
class EssModuleSpec:
    kind: EssKind
    name: str
    energy_per_module: float  # MWh
    invest_cost: float  # per module
    maintenance_rate: float  # per MWh of charge + discharge
    eta_ch: float = 0.95
    eta_dis: float = 0.95
    max_charge_power: float | None = None  # MW per module
    max_discharge_power: float | None = None
    max_modules: int = 100
    lifetime_years: int = 10

    def __post_init__(self):
        object.__setattr__(self, "kind", EssKind(self.kind))
        if self.max_charge_power is None:
            object.__setattr__(self, "max_charge_power", 0.5 * self.energy_per_module)
        if self.max_discharge_power is None:
            object.__setattr__(self, "max_discharge_power", 0.5 * self.energy_per_module)
        if self.energy_per_module <= 0:
            raise ModelError(f"{self.name}: module energy must be positive")
        if not (0 < self.eta_ch <= 1 and 0 < self.eta_dis <= 1):
            raise ModelError(f"{self.name}: efficiencies must lie in (0, 1]")
        if self.invest_cost < 0 or self.maintenance_rate < 0:
            raise ModelError(f"{self.name}: costs must be nonnegative")
        if self.max_modules < 0 or self.lifetime_years < 1:
            raise ModelError(f"{self.name}: bad module cap or lifetime")

    @property
    def carrier(self) -> int:
        return ESS_CARRIER[EssKind(self.kind)]


@dataclass(frozen=True, eq=False)
class Scenario:
    """One typical day with its probability."""

    prob: float
    load_e: np.ndarray
    load_h: np.ndarray
    load_c: np.ndarray
    wind_speed: np.ndarray
    irradiance: np.ndarray
    price_e: np.ndarray
    label: str = ""

    def __post_init__(self):
        for name in ("load_e", "load_h", "load_c", "irradiance", "wind_speed"):
            object.__setattr__(self, name, _frozen(getattr(self, name), name, nonneg=True))
        object.__setattr__(self, "price_e", _frozen(self.price_e, "price_e"))
        n = {len(getattr(self, k)) for k in SERIES_FIELDS}
        if len(n) != 1:
            raise ModelError("scenario series must share one length")
        if not 0 < self.prob <= 1 + 1e-12:
            raise ModelError(f"scenario probability {self.prob} outside (0, 1]")

    @property
    def steps(self) -> int:
        return len(self.load_e)

    @property
    def loads(self) -> np.ndarray:
        """Loads as a ``(steps, 3)`` array ordered e, h, c."""
        return np.stack([self.load_e, self.load_h, self.load_c], axis=1)

    def with_prob(self, prob: float) -> "Scenario":
        return replace(self, prob=prob)


SERIES_FIELDS = ("load_e", "load_h", "load_c", "wind_speed", "irradiance", "price_e")


@dataclass(frozen=True)
class EhInstance:
    """A complete planning problem.

    Money is carried in RMB. ``gas_price`` is per MWh of gas input;
    ``days_per_year`` scales expected daily operation cost to a year so it
    is commensurate with the annualized investment.
    """

    devices: tuple[DeviceOption, ...]
    res_options: tuple[ResModuleSpec, ...]
    ess_options: tuple[EssModuleSpec, ...]
    scenarios: tuple[Scenario, ...]
    gas_price: float = 340.0
    shed_cost: tuple[float, float, float] = (2000.0, 1800.0, 1800.0)
    res_penetration_cap: float = 0.5
    discount_rate: float = 0.08
    days_per_year: float = 365.0
    dt: float = 1.0

    def __post_init__(self):
        for name in ("devices", "res_options", "ess_options", "scenarios"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "shed_cost", tuple(float(x) for x in self.shed_cost))
        if not self.scenarios:
            raise ModelError("instance needs at least one scenario")
        total = sum(s.prob for s in self.scenarios)
        if abs(total - 1.0) > 1e-9:
            raise ModelError(f"scenario probabilities sum to {total!r}, not 1")
        if len({s.steps for s in self.scenarios}) != 1:
            raise ModelError("all scenarios must have the same number of steps")
        if not 0 <= self.res_penetration_cap <= 1:
            raise ModelError("RES penetration cap must lie in [0, 1]")
        if not 0 < self.discount_rate < 1:
            raise ModelError("discount rate must lie in (0, 1)")
        if self.gas_price < 0 or any(m < 0 for m in self.shed_cost) or len(self.shed_cost) != 3:
            raise ModelError("prices and shedding costs must be nonnegative")
        if self.dt <= 0 or self.days_per_year <= 0:
            raise ModelError("dt and days_per_year must be positive")
        keys = [d.key for d in self.devices]
        if len(set(keys)) != len(keys):
            raise ModelError("duplicate device option keys")
        names = [o.name for o in self.res_options] + [o.name for o in self.ess_options]
        if len(set(names)) != len(names):
            raise ModelError("duplicate RES/ESS option names")

    @property
    def steps(self) -> int:
        return self.scenarios[0].steps

    @property
    def probs(self) -> np.ndarray:
        return np.array([s.prob for s in self.scenarios])

    def devices_of(self, kind: DeviceKind) -> list[int]:
        return [i for i, d in enumerate(self.devices) if d.kind is DeviceKind(kind)]

    def check_buildable(self) -> None:
        """Raise :class:`InfeasibleModelError` when the at-least-one CCHP/TX
        investment rule cannot be met."""
        for kind in (DeviceKind.CCHP, DeviceKind.TX):
            if not self.devices_of(kind):
                raise InfeasibleModelError(f"no {kind.value} candidate: at least one must be built")

    def with_scenarios(self, scenarios: Sequence[Scenario]) -> "EhInstance":
        return replace(self, scenarios=tuple(scenarios))

    def restricted(self, *, res: bool = True, ess: bool = True) -> "EhInstance":
        """Copy with the RES and/or ESS candidate sets removed."""
        return replace(
            self,
            res_options=self.res_options if res else (),
            ess_options=self.ess_options if ess else (),
        )


@dataclass(frozen=True, eq=False)
class PlanDecision:
    """First-stage decision, arrays aligned with the instance option order."""

    u: np.ndarray
    z_res: np.ndarray
    z_ess: np.ndarray

    def __post_init__(self):
        for name in ("u", "z_res", "z_ess"):
            arr = np.array(getattr(self, name), dtype=int).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def key(self) -> tuple:
        return (tuple(self.u), tuple(self.z_res), tuple(self.z_ess))

    def __eq__(self, other):
        return isinstance(other, PlanDecision) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def describe(self, instance: EhInstance) -> dict[str, int]:
        out = {f"{d.kind.value}:{d.capacity_id}": int(v) for d, v in zip(instance.devices, self.u)}
        out.update({o.name: int(v) for o, v in zip(instance.res_options, self.z_res)})
        out.update({o.name: int(v) for o, v in zip(instance.ess_options, self.z_ess)})
        return out


@dataclass(eq=False)
class OperationSchedule:
    """Second-stage dispatch for every scenario.

    Shapes use ``S`` scenarios, ``T`` steps, ``D`` devices, ``M`` RES
    options and ``N`` ESS options. ``soc`` has ``T + 1`` entries per day so
    that the end-of-day state can be compared with the start.
    """

    p_in: np.ndarray  # (S, T, D, 2) device inputs, carriers e, g
    hub_out: np.ndarray  # (S, T, 3) converter outputs e, h, c
    p_res: np.ndarray  # (S, T, M)
    p_ch: np.ndarray  # (S, T, N)
    p_dis: np.ndarray  # (S, T, N)
    soc: np.ndarray  # (S, T + 1, N)
    v_ch: np.ndarray  # (S, T, N)
    v_dis: np.ndarray  # (S, T, N)
    shed: np.ndarray  # (S, T, 3)

    @classmethod
    def zeros(cls, instance: EhInstance) -> "OperationSchedule":
        S, T = len(instance.scenarios), instance.steps
        D, M, N = len(instance.devices), len(instance.res_options), len(instance.ess_options)
        return cls(
            p_in=np.zeros((S, T, D, 2)),
            hub_out=np.zeros((S, T, 3)),
            p_res=np.zeros((S, T, M)),
            p_ch=np.zeros((S, T, N)),
            p_dis=np.zeros((S, T, N)),
            soc=np.zeros((S, T + 1, N)),
            v_ch=np.zeros((S, T, N)),
            v_dis=np.zeros((S, T, N)),
            shed=np.zeros((S, T, 3)),
        )

    def copy(self) -> "OperationSchedule":
        return OperationSchedule(**{k: v.copy() for k, v in self.__dict__.items()})

    def recompute_hub_output(self, instance: EhInstance) -> None:
        coup = np.stack([d.coupling_matrix for d in instance.devices]) if instance.devices else np.zeros((0, 3, 2))
        self.hub_out = np.einsum("dro,stdo->str", coup, self.p_in)

    def set_state_flags(self, tol: float = 1e-9) -> None:
        """Derive charge/discharge flags from the power profile."""
        self.v_ch = (self.p_ch > tol).astype(float)
        self.v_dis = (self.p_dis > tol).astype(float)

    @property
    def n_scenarios(self) -> int:
        return self.shed.shape[0]


@dataclass(frozen=True)
class CostBreakdown:
    """Cost components of a plan.

    ``tc``, ``mc`` and ``lc`` are per-scenario daily costs. Expected
    operation cost, VaR, CVaR and the objective are annual figures.
    """

    ic: float
    tc: np.ndarray = field(repr=False)
    mc: np.ndarray = field(repr=False)
    lc: np.ndarray = field(repr=False)
    probs: np.ndarray = field(repr=False)
    days_per_year: float
    oc_expected: float
    var_alpha: float
    cvar_alpha: float
    objective: float
    alpha: float
    beta: float

    @property
    def losses(self) -> np.ndarray:
        return self.tc + self.mc + self.lc

    @property
    def tc_expected(self) -> float:
        return float(self.days_per_year * self.probs @ self.tc)

    @property
    def mc_expected(self) -> float:
        return float(self.days_per_year * self.probs @ self.mc)

    @property
    def lc_expected(self) -> float:
        return float(self.days_per_year * self.probs @ self.lc)

    def components(self) -> dict[str, float]:
        return {
            "IC": self.ic,
            "TC": self.tc_expected,
            "MC": self.mc_expected,
            "LC": self.lc_expected,
            "VaR": self.var_alpha,
            "CVaR": self.cvar_alpha,
            "Total": self.objective,
        }
