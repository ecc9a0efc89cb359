"""Domain types, default parameterization and configuration handling.

All quantities are kept in a single internal unit system: kW, kWh, hours,
years and US dollars. Application power capacities are commonly quoted in
MW and are converted to kW at load time.

Every type is an immutable dataclass and validates its own invariants on
construction, so a ParameterSet that exists is always internally
consistent. This matters for the Monte-Carlo machinery, which rebuilds
parameter sets from perturbed values and relies on construction-time
re-validation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from importlib import resources
from typing import Optional

import numpy as np
import yaml

CONFIG_SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class LcodrError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LcodrError):
    """Input file could not be parsed at all."""


class ValidationError(LcodrError):
    """A value violates a model invariant. Carries the offending field."""

    def __init__(self, message: str, field_path: str = ""):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


class SchemaVersionError(LcodrError):
    """Configuration file declares an unsupported schema version."""


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------

class SchemeKind(enum.Enum):
    """The four direct-load-control schemes."""

    V2G = "v2g"
    SMART_CHARGING = "smart_charging"
    SMART_HEAT_PUMP = "smart_heat_pump"
    HP_THERMAL_STORAGE = "hp_thermal_storage"

    @classmethod
    def from_name(cls, name: str) -> "SchemeKind":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValidationError(f"unknown scheme {name!r} (expected one of {valid})",
                                  "scheme") from None


#: Schemes that can only shift load, not export power.
UNIDIRECTIONAL_SCHEMES = frozenset(
    {SchemeKind.SMART_CHARGING, SchemeKind.SMART_HEAT_PUMP, SchemeKind.HP_THERMAL_STORAGE}
)


class BindingConstraint(enum.Enum):
    POWER = "power"
    ENERGY = "energy"
    NOT_APPLICABLE = "not_applicable"


# ---------------------------------------------------------------------------
# Parameter groups
# ---------------------------------------------------------------------------

def _check(cond: bool, message: str, field_path: str) -> None:
    if not cond:
        raise ValidationError(message, field_path)


@dataclass(frozen=True)
class EvParameters:
    """EV-scheme inputs: charger hardware, driving pattern and reward rates.

    Attributes:
        charger_power: Rated charger power in kW.
        charger_efficiency: One-way (dis-)charging efficiency, in (0, 1].
        battery_capacity: EV battery energy capacity in kWh.
        guaranteed_min_charge: Battery fraction the aggregator must never
            discharge below, in [0, 1).
        daily_drive_energy: Average daily driving energy in kWh/day.
        home_charge_fraction: Share of driving energy charged at the home
            charger, in [0, 1].
        base_plugin_time: Observed average daily plug-in hours; also the
            required plug-in time at which the base reward applies.
        v2g_reward_base / v2g_reward_per_hour: Monthly willingness-to-accept
            for a V2G contract, base and per extra plug-in hour ($/month).
        smart_reward_base / smart_reward_per_hour: Same for smart charging.
    """

    charger_power: float = 7.4
    charger_efficiency: float = 0.92
    battery_capacity: float = 60.0
    guaranteed_min_charge: float = 0.30
    daily_drive_energy: float = 5.56
    home_charge_fraction: float = 0.90
    base_plugin_time: float = 11.5
    v2g_reward_base: float = 59.1
    v2g_reward_per_hour: float = 29.0
    smart_reward_base: float = 40.81
    smart_reward_per_hour: float = 11.8

    def __post_init__(self):
        _check(self.charger_power > 0, "charger power must be > 0", "charger_power")
        _check(0 < self.charger_efficiency <= 1,
               "efficiency must be in (0, 1]", "charger_efficiency")
        _check(self.battery_capacity > 0, "battery capacity must be > 0", "battery_capacity")
        _check(0 <= self.guaranteed_min_charge < 1,
               "guaranteed minimum charge must be in [0, 1)", "guaranteed_min_charge")
        _check(self.daily_drive_energy >= 0, "daily drive energy must be >= 0",
               "daily_drive_energy")
        _check(0 <= self.home_charge_fraction <= 1,
               "home charge fraction must be in [0, 1]", "home_charge_fraction")
        _check(0 <= self.base_plugin_time <= 24,
               "base plug-in time must be in [0, 24] h", "base_plugin_time")
        for name in ("v2g_reward_base", "v2g_reward_per_hour",
                     "smart_reward_base", "smart_reward_per_hour"):
            _check(getattr(self, name) >= 0, "reward rates must be >= 0", name)
        _check(self.daily_charge_time < 24,
               "daily home charging alone would exceed 24 h", "daily_drive_energy")

    @property
    def effective_charger_power(self) -> float:
        """Grid-side charger power after efficiency, kW."""
        return self.charger_power * self.charger_efficiency

    @property
    def daily_charge_time(self) -> float:
        """Hours per day the charger is busy replacing driving energy."""
        return (self.daily_drive_energy * self.home_charge_fraction
                / self.effective_charger_power)

    @property
    def min_battery_energy(self) -> float:
        """Guaranteed minimum energy level, kWh. Always derived, never stored."""
        return self.battery_capacity * self.guaranteed_min_charge

    @property
    def dischargeable_energy(self) -> float:
        """Battery band available to the aggregator, kWh."""
        return self.battery_capacity - self.min_battery_energy


@dataclass(frozen=True)
class HeatParameters:
    """Heat-pump-scheme inputs: thermal constants, contract terms, tank geometry.

    building_heat_capacity and water_heat_capacity are in kJ/K and
    kJ/(kg.K) respectively; conversions to kWh happen at the point of use.
    The tank's high temperature is assumed to stay below boiling; absolute
    temperatures are not modeled, only the usable range tank_temp_range.
    """

    hp_average_power: float = 0.46       # kW, average over all hours
    hp_active_power: float = 1.68        # kW, average while the unit runs
    seasonal_performance: float = 2.71   # heat out per electricity in
    building_heat_capacity: float = 34780.0   # kJ/K
    building_temp_divergence: float = 1.67    # K, tolerated set-point deviation
    max_activations_per_month: float = 3.33
    hp_reward_monthly: float = 10.7           # $/month/thermostat
    tank_area_reward_monthly: float = 17.7    # $/month/m^2 of floor space
    water_density: float = 1000.0             # kg/m^3
    water_heat_capacity: float = 4.18         # kJ/(kg.K)
    tank_temp_range: float = 35.0             # K
    wall_thickness: float = 0.05              # m, tank insulation
    ceiling_height: float = 2.3               # m

    def __post_init__(self):
        _check(self.hp_average_power > 0, "average power must be > 0", "hp_average_power")
        _check(self.hp_active_power >= self.hp_average_power,
               "active power must be >= average power", "hp_active_power")
        _check(self.seasonal_performance > 1,
               "seasonal performance factor must be > 1", "seasonal_performance")
        _check(self.building_heat_capacity > 0, "heat capacity must be > 0",
               "building_heat_capacity")
        _check(self.building_temp_divergence >= 0, "temperature divergence must be >= 0",
               "building_temp_divergence")
        _check(self.max_activations_per_month > 0, "activation limit must be > 0",
               "max_activations_per_month")
        _check(self.hp_reward_monthly >= 0, "reward must be >= 0", "hp_reward_monthly")
        _check(self.tank_area_reward_monthly >= 0, "reward must be >= 0",
               "tank_area_reward_monthly")
        _check(self.water_density > 0, "density must be > 0", "water_density")
        _check(self.water_heat_capacity > 0, "heat capacity must be > 0",
               "water_heat_capacity")
        _check(self.tank_temp_range > 0, "temperature range must be > 0", "tank_temp_range")
        _check(self.wall_thickness > 0, "wall thickness must be > 0", "wall_thickness")
        _check(self.ceiling_height > 2 * self.wall_thickness,
               "ceiling height must exceed twice the wall thickness", "ceiling_height")


@dataclass(frozen=True)
class EconomicParameters:
    """Discounting, prices, capital and end-of-life costs.

    electricity_price is in $/kWh (the conventional 50 $/MWh default is
    0.05 here). The default discount rate of 8 %/year is a modeling choice,
    configurable via ``discount_rate``.
    """

    discount_rate: float = 0.08
    lifetime_years: int = 15
    electricity_price: float = 0.05      # $/kWh
    v2g_charger_capex: float = 3000.0    # $/charger
    smart_charger_capex: float = 107.0   # $/charger
    thermostat_capex: float = 85.0       # $/thermostat
    tank_capex_per_m3: float = 2042.0    # $/m^3
    om_fraction: float = 0.05            # of capex, per year
    v2g_eol_per_charger: float = 50.0    # $ at end of life
    tank_eol_per_m2: float = 10.0        # $/m^2 at end of life
    reward_floor: float = 5.0            # $/month minimum reward

    def __post_init__(self):
        _check(0 <= self.discount_rate < 1, "discount rate must be in [0, 1)",
               "discount_rate")
        _check(isinstance(self.lifetime_years, int) and self.lifetime_years >= 1,
               "lifetime must be an integer >= 1", "lifetime_years")
        _check(self.electricity_price > 0, "electricity price must be > 0",
               "electricity_price")
        for name in ("v2g_charger_capex", "smart_charger_capex", "thermostat_capex",
                     "tank_capex_per_m3", "v2g_eol_per_charger", "tank_eol_per_m2"):
            _check(getattr(self, name) >= 0, "cost must be >= 0", name)
        _check(self.om_fraction >= 0, "O&M fraction must be >= 0", "om_fraction")
        _check(self.reward_floor >= 0, "reward floor must be >= 0", "reward_floor")


@dataclass(frozen=True)
class ValueFactorTable:
    """Per-scheme value factors. V2G carries a power and an energy variant;
    the two heat-pump schemes share a single value because their
    uncontrolled demand profile is the same."""

    v2g_power: float = 1.0
    v2g_energy: float = 1.0
    smart_charging: float = 1.0
    heat_pump: float = 1.0

    def __post_init__(self):
        for name in ("v2g_power", "v2g_energy", "smart_charging", "heat_pump"):
            _check(getattr(self, name) > 0, "value factor must be > 0", name)

    def for_scheme(self, scheme: SchemeKind,
                   binding: BindingConstraint = BindingConstraint.NOT_APPLICABLE) -> float:
        if scheme is SchemeKind.V2G:
            if binding is BindingConstraint.ENERGY:
                return self.v2g_energy
            return self.v2g_power
        if scheme is SchemeKind.SMART_CHARGING:
            return self.smart_charging
        return self.heat_pump


@dataclass(frozen=True)
class Assumptions:
    """Explicit toggles for modeling choices that fill gaps in the source data.

    rpt_floor_at_base: contracts never require less plug-in time than the
        observed base plug-in time (consumers already plug in that long, and
        the reward data is anchored to the base contract).
    v2g_rebound_roundtrip: price V2G rebound energy at 1/efficiency^2 per
        delivered unit (discharge loses eta, recharge draws 1/eta).
    cycle_constraint_direction: 'scale_up' grows the heat-pump fleet when an
        application needs more cycles than a contract allows; 'as_printed'
        applies the reciprocal factor instead.
    reward_base_hours: override for the plug-in hours at which the base
        reward applies in the reward formula (None: use base_plugin_time).
    """

    rpt_floor_at_base: bool = True
    v2g_rebound_roundtrip: bool = True
    cycle_constraint_direction: str = "scale_up"
    reward_base_hours: Optional[float] = None

    def __post_init__(self):
        _check(self.cycle_constraint_direction in ("scale_up", "as_printed"),
               "must be 'scale_up' or 'as_printed'", "cycle_constraint_direction")
        if self.reward_base_hours is not None:
            _check(0 <= self.reward_base_hours <= 24,
                   "must be in [0, 24] h", "reward_base_hours")


@dataclass(frozen=True)
class ParameterSet:
    """The full numeric input vector: the unit perturbed by Monte-Carlo."""

    ev: EvParameters = field(default_factory=EvParameters)
    heat: HeatParameters = field(default_factory=HeatParameters)
    econ: EconomicParameters = field(default_factory=EconomicParameters)
    value_factors: ValueFactorTable = field(default_factory=ValueFactorTable)
    assumptions: Assumptions = field(default_factory=Assumptions)


# ---------------------------------------------------------------------------
# Applications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ApplicationSpec:
    """A storage application: what the grid service requires.

    power_capacity is stored in kW (config files use MW, converted at load).
    """

    name: str
    power_capacity: float         # kW
    discharge_duration: float     # hours per activation
    annual_cycles: float          # activations per year
    suitable_schemes: frozenset = frozenset()

    def __post_init__(self):
        _check(bool(self.name), "application name must not be empty", "name")
        _check(self.power_capacity > 0, "power capacity must be > 0", "power_capacity")
        _check(self.discharge_duration > 0, "discharge duration must be > 0",
               "discharge_duration")
        _check(self.annual_cycles >= 1, "annual cycles must be >= 1", "annual_cycles")
        _check(self.annual_cycles * self.discharge_duration <= 8760.0,
               "annual discharge hours exceed hours in a year", "annual_cycles")
        object.__setattr__(self, "suitable_schemes", frozenset(self.suitable_schemes))
        for s in self.suitable_schemes:
            _check(isinstance(s, SchemeKind), "suitable_schemes must contain SchemeKind",
                   "suitable_schemes")

    @property
    def annual_energy_mwh(self) -> float:
        """Energy shifted per year when the service is fully delivered, MWh."""
        return self.power_capacity * self.discharge_duration * self.annual_cycles / 1000.0


# ---------------------------------------------------------------------------
# Time series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeSeries:
    """A regularly spaced series of numbers with a declared unit.

    Gaps are a load-time error; a TimeSeries that exists has no missing
    values. The value buffer is frozen so instances can be shared across
    workers.
    """

    start: datetime
    interval_seconds: float
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        _check(self.start.tzinfo is not None, "start timestamp must be timezone-aware",
               "start")
        _check(self.interval_seconds > 0, "interval must be > 0 s", "interval_seconds")
        vals = np.asarray(self.values, dtype=np.float64)
        _check(vals.ndim == 1, "values must be one-dimensional", "values")
        _check(len(vals) >= 2, "a time series needs at least 2 points", "values")
        _check(bool(np.isfinite(vals).all()), "values must all be finite", "values")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "start", self.start.astimezone(timezone.utc))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> datetime:
        """Exclusive end instant of the covered range."""
        from datetime import timedelta
        return self.start + timedelta(seconds=self.interval_seconds * len(self.values))

    def with_values(self, values: np.ndarray, unit: Optional[str] = None) -> "TimeSeries":
        return TimeSeries(self.start, self.interval_seconds, values,
                          self.unit if unit is None else unit)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SizingResult:
    """Outcome of sizing one (scheme, application) pairing.

    Asset counts are real-valued; contracted_assets_ceiled is reported for
    information only. Fields that do not apply to a scheme stay None.
    """

    scheme: SchemeKind
    feasible: bool
    reason: str = ""
    contracted_assets: Optional[float] = None
    available_assets: Optional[float] = None
    binding_constraint: BindingConstraint = BindingConstraint.NOT_APPLICABLE
    required_plugin_time: Optional[float] = None   # h, EV schemes
    power_reduction: Optional[float] = None        # kW, smart heat pump
    tank_area: Optional[float] = None              # m^2 per dwelling
    tank_volume: Optional[float] = None            # m^3 per dwelling
    tank_mass: Optional[float] = None              # kg per dwelling

    def __post_init__(self):
        if self.feasible:
            _check(self.contracted_assets is not None and self.contracted_assets > 0,
                   "feasible sizing needs a positive contracted count", "contracted_assets")
            _check(self.available_assets is not None and self.available_assets > 0,
                   "feasible sizing needs a positive available count", "available_assets")
            _check(self.contracted_assets >= self.available_assets - 1e-9,
                   "contracted count cannot be below available count", "contracted_assets")
        else:
            _check(bool(self.reason), "infeasible sizing must carry a reason", "reason")

    @property
    def contracted_assets_ceiled(self) -> Optional[int]:
        if self.contracted_assets is None:
            return None
        return int(math.ceil(self.contracted_assets - 1e-9))


@dataclass(frozen=True)
class CostBreakdown:
    """Discounted cost components and the resulting levelised figures."""

    investment: float          # $ at t = 0
    om_pv: float               # $ present value of O&M
    rewards_pv: float          # $ present value of consumer rewards
    rebound_pv: float          # $ present value of rebound energy purchases
    eol_pv: float              # $ present value of end-of-life costs
    energy_pv: float           # MWh, discounted delivered energy
    lcodr_energy: float        # $/MWh
    lcodr_power: float         # $/kW-year
    value_factor: float
    lcodr_vf: float            # $/MWh, availability-profile adjusted

    @property
    def total_cost_pv(self) -> float:
        return (self.investment + self.om_pv + self.rewards_pv
                + self.rebound_pv + self.eol_pv)


# ---------------------------------------------------------------------------
# Parameter registry (drives config validation and Monte-Carlo perturbation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamSpec:
    """One scalar input: where it lives, whether uncertainty applies to it,
    and the domain it must be clamped to after perturbation."""

    key: str
    group: str                 # 'ev' | 'heat' | 'econ'
    perturb: bool = True
    lower: Optional[float] = None
    upper: Optional[float] = None


_EPS = 1e-9

#: Ordered registry of every scalar parameter. The position in this list is
#: the parameter's stable id for seeded Monte-Carlo substreams; append only.
PARAMETERS: tuple = (
    ParamSpec("charger_power", "ev", lower=_EPS),
    ParamSpec("charger_efficiency", "ev", lower=_EPS, upper=1.0),
    ParamSpec("battery_capacity", "ev", lower=_EPS),
    ParamSpec("guaranteed_min_charge", "ev", lower=0.0, upper=1.0 - _EPS),
    ParamSpec("daily_drive_energy", "ev", lower=0.0),
    ParamSpec("home_charge_fraction", "ev", lower=0.0, upper=1.0),
    ParamSpec("base_plugin_time", "ev", lower=0.0, upper=24.0),
    ParamSpec("v2g_reward_base", "ev", lower=0.0),
    ParamSpec("v2g_reward_per_hour", "ev", lower=0.0),
    ParamSpec("smart_reward_base", "ev", lower=0.0),
    ParamSpec("smart_reward_per_hour", "ev", lower=0.0),
    ParamSpec("hp_average_power", "heat", lower=_EPS),
    ParamSpec("hp_active_power", "heat", lower=_EPS),
    ParamSpec("seasonal_performance", "heat", lower=1.0 + _EPS),
    ParamSpec("building_heat_capacity", "heat", lower=_EPS),
    ParamSpec("building_temp_divergence", "heat", lower=0.0),
    ParamSpec("max_activations_per_month", "heat", lower=_EPS),
    ParamSpec("hp_reward_monthly", "heat", lower=0.0),
    ParamSpec("tank_area_reward_monthly", "heat", lower=0.0),
    ParamSpec("water_density", "heat", lower=_EPS),
    ParamSpec("water_heat_capacity", "heat", lower=_EPS),
    ParamSpec("tank_temp_range", "heat", lower=_EPS),
    ParamSpec("wall_thickness", "heat", lower=_EPS),
    ParamSpec("ceiling_height", "heat", lower=_EPS),
    ParamSpec("discount_rate", "econ", lower=0.0, upper=1.0 - _EPS),
    ParamSpec("lifetime_years", "econ", perturb=False),
    ParamSpec("electricity_price", "econ", lower=_EPS),
    ParamSpec("v2g_charger_capex", "econ", lower=0.0),
    ParamSpec("smart_charger_capex", "econ", lower=0.0),
    ParamSpec("thermostat_capex", "econ", lower=0.0),
    ParamSpec("tank_capex_per_m3", "econ", lower=0.0),
    ParamSpec("om_fraction", "econ", perturb=False),
    ParamSpec("v2g_eol_per_charger", "econ", perturb=False),
    ParamSpec("tank_eol_per_m2", "econ", perturb=False),
    ParamSpec("reward_floor", "econ", perturb=False),
)

PARAMETER_INDEX = {spec.key: i for i, spec in enumerate(PARAMETERS)}

VALUE_FACTOR_KEYS = ("v2g_power", "v2g_energy", "smart_charging", "heat_pump")

_GROUP_TYPES = {"ev": EvParameters, "heat": HeatParameters, "econ": EconomicParameters}


def parameter_values(params: ParameterSet) -> dict:
    """Flat {key: value} view of every registered scalar parameter."""
    out = {}
    for spec in PARAMETERS:
        out[spec.key] = getattr(getattr(params, spec.group), spec.key)
    return out


def build_parameter_set(values: dict, value_factors: Optional[dict] = None,
                        assumptions: Optional[Assumptions] = None) -> ParameterSet:
    """Construct a validated ParameterSet from a flat {key: value} mapping.

    Missing keys take the dataclass defaults; validation errors propagate
    with the offending field path.
    """
    groups = {"ev": {}, "heat": {}, "econ": {}}
    for key, value in values.items():
        if key not in PARAMETER_INDEX:
            raise ValidationError(f"unknown parameter {key!r}", key)
        spec = PARAMETERS[PARAMETER_INDEX[key]]
        if key == "lifetime_years":
            if not float(value).is_integer():
                raise ValidationError("lifetime must be an integer number of years", key)
            value = int(value)
        else:
            value = float(value)
        groups[spec.group][key] = value
    vf = ValueFactorTable(**{k: float(v) for k, v in (value_factors or {}).items()
                             if _known_vf_key(k)})
    return ParameterSet(
        ev=EvParameters(**groups["ev"]),
        heat=HeatParameters(**groups["heat"]),
        econ=EconomicParameters(**groups["econ"]),
        value_factors=vf,
        assumptions=assumptions if assumptions is not None else Assumptions(),
    )


def _known_vf_key(key: str) -> bool:
    if key not in VALUE_FACTOR_KEYS:
        raise ValidationError(f"unknown value factor key {key!r}", f"value_factors.{key}")
    return True


# ---------------------------------------------------------------------------
# Configuration files
# ---------------------------------------------------------------------------

def _bundled_defaults() -> dict:
    text = resources.files("lcodr").joinpath("defaults.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


_ALLOWED_TOP_KEYS = {"schema_version", "parameters", "value_factors", "assumptions",
                     "applications"}
_ALLOWED_APP_KEYS = {"name", "power_capacity_mw", "discharge_duration_h",
                     "annual_cycles", "suitable_schemes"}
_ALLOWED_ASSUMPTION_KEYS = {"rpt_floor_at_base", "v2g_rebound_roundtrip",
                            "cycle_constraint_direction", "reward_base_hours"}


def _applications_from_config(entries: list) -> list:
    apps = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ValidationError("application entry must be a mapping",
                                  f"applications[{i}]")
        unknown = set(entry) - _ALLOWED_APP_KEYS
        if unknown:
            raise ValidationError(f"unknown keys {sorted(unknown)}", f"applications[{i}]")
        try:
            apps.append(ApplicationSpec(
                name=str(entry["name"]),
                power_capacity=float(entry["power_capacity_mw"]) * 1000.0,
                discharge_duration=float(entry["discharge_duration_h"]),
                annual_cycles=float(entry["annual_cycles"]),
                suitable_schemes=frozenset(
                    SchemeKind.from_name(s) for s in entry.get("suitable_schemes", [])),
            ))
        except KeyError as exc:
            raise ValidationError(f"missing key {exc.args[0]!r}",
                                  f"applications[{i}]") from None
    return apps


def load_config_dict(overrides: Optional[dict]):
    """Merge an override mapping onto the bundled defaults.

    Returns (ParameterSet, list of ApplicationSpec). Parameter overrides may
    appear either under a ``parameters`` section or directly at the top
    level. Unknown keys anywhere are an error.
    """
    base = _bundled_defaults()
    merged_params = dict(base["parameters"])
    merged_vf = dict(base.get("value_factors", {}))
    merged_assumptions = dict(base.get("assumptions", {}))
    app_entries = base["applications"]

    overrides = overrides or {}
    if not isinstance(overrides, dict):
        raise ParseError("configuration root must be a mapping")

    version = overrides.get("schema_version")
    if version is not None and version != CONFIG_SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unsupported schema_version {version!r} (expected {CONFIG_SCHEMA_VERSION})")

    for key, value in overrides.items():
        if key == "schema_version":
            continue
        elif key == "parameters":
            if not isinstance(value, dict):
                raise ValidationError("must be a mapping", "parameters")
            merged_params.update(value)
        elif key == "value_factors":
            if not isinstance(value, dict):
                raise ValidationError("must be a mapping", "value_factors")
            merged_vf.update(value)
        elif key == "assumptions":
            if not isinstance(value, dict):
                raise ValidationError("must be a mapping", "assumptions")
            unknown = set(value) - _ALLOWED_ASSUMPTION_KEYS
            if unknown:
                raise ValidationError(f"unknown keys {sorted(unknown)}", "assumptions")
            merged_assumptions.update(value)
        elif key == "applications":
            if not isinstance(value, list):
                raise ValidationError("must be a list", "applications")
            app_entries = value
        elif key in PARAMETER_INDEX:
            # flat parameter override at the top level
            merged_params[key] = value
        else:
            raise ValidationError(f"unknown configuration key {key!r}", key)

    assumptions = Assumptions(**merged_assumptions)
    params = build_parameter_set(merged_params, merged_vf, assumptions)
    apps = _applications_from_config(app_entries)
    return params, apps


def load_config(path: Optional[str] = None):
    """Load a configuration file (YAML) merged over the bundled defaults.

    ``path=None`` or an empty file yields the full default parameterization.
    """
    overrides = None
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                overrides = yaml.safe_load(fh)
        except FileNotFoundError:
            raise ParseError(f"configuration file not found: {path}") from None
        except yaml.YAMLError as exc:
            raise ParseError(f"malformed configuration file {path}: {exc}") from None
    return load_config_dict(overrides)


def parameter_set_to_dict(params: ParameterSet) -> dict:
    """Serialize a ParameterSet into a config-shaped mapping.

    Round-trips bit-exactly: load_config_dict(parameter_set_to_dict(p))
    reproduces every numeric field.
    """
    vf = params.value_factors
    return {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "parameters": parameter_values(params),
        "value_factors": {k: getattr(vf, k) for k in VALUE_FACTOR_KEYS},
        "assumptions": {
            "rpt_floor_at_base": params.assumptions.rpt_floor_at_base,
            "v2g_rebound_roundtrip": params.assumptions.v2g_rebound_roundtrip,
            "cycle_constraint_direction": params.assumptions.cycle_constraint_direction,
            "reward_base_hours": params.assumptions.reward_base_hours,
        },
    }


def default_parameters() -> ParameterSet:
    """The bundled default parameterization."""
    params, _ = load_config_dict(None)
    return params


def default_applications() -> list:
    """The twelve bundled storage applications with their suitability sets."""
    _, apps = load_config_dict(None)
    return apps
