"""Lifetime cash flows and levelised cost reduction.

Builds the aggregator's discounted cost schedule for a sized pairing —
investment, O&M, consumer rewards, rebound energy purchases, end-of-life —
and reduces it to the levelised cost per shifted MWh (and per kW-year),
optionally adjusted by the scheme's availability-profile value factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (
    ApplicationSpec,
    BindingConstraint,
    CostBreakdown,
    LcodrError,
    ParameterSet,
    SchemeKind,
    SizingResult,
)
from .sizing import size_pairing


class CostingError(LcodrError):
    pass


class InfeasibleInput(CostingError):
    """Cash flows were requested for an infeasible sizing."""


class ZeroEnergy(CostingError):
    pass


class NonPositiveValueFactor(CostingError):
    pass


@dataclass(frozen=True)
class CashFlowSchedule:
    """Constant annual cash flows over the scheme lifetime.

    Monetary fields in $, energy in MWh/year. End-of-life costs fall due one
    year after the last operating year.
    """

    investment_t0: float
    annual_om: float
    annual_rewards: float
    annual_rebound: float
    eol_cost: float
    annual_energy: float
    lifetime_years: int
    discount_rate: float


def present_value_annual(amount: float, discount_rate: float, years: int) -> float:
    """Present value of a constant annual amount paid at the end of years
    1..T. Computed by explicit summation; the year-by-year sum is the
    definition, not an approximation of the annuity formula."""
    return amount * sum((1.0 + discount_rate) ** -t for t in range(1, years + 1))


def monthly_reward_per_asset(scheme: SchemeKind, sizing: SizingResult,
                             params: ParameterSet) -> float:
    """Monthly payment to one contracted consumer, $.

    EV schemes pay a base reward plus a per-hour rate on plug-in time above
    the base contract; thermal storage pays for the tank's floor area; the
    smart heat-pump reward is a flat thermostat payment. V2G, smart charging
    and thermal storage are floored at the minimum monthly reward.
    """
    if not sizing.feasible:
        raise InfeasibleInput(sizing.reason)
    ev, econ = params.ev, params.econ
    base_hours = params.assumptions.reward_base_hours
    if base_hours is None:
        base_hours = ev.base_plugin_time
    if scheme is SchemeKind.V2G:
        reward = ev.v2g_reward_base + (sizing.required_plugin_time - base_hours) \
            * ev.v2g_reward_per_hour
        return max(econ.reward_floor, reward)
    if scheme is SchemeKind.SMART_CHARGING:
        reward = ev.smart_reward_base + (sizing.required_plugin_time - base_hours) \
            * ev.smart_reward_per_hour
        return max(econ.reward_floor, reward)
    if scheme is SchemeKind.SMART_HEAT_PUMP:
        return params.heat.hp_reward_monthly
    return max(econ.reward_floor,
               params.heat.tank_area_reward_monthly * sizing.tank_area)


def _capex_per_asset(scheme: SchemeKind, sizing: SizingResult,
                     params: ParameterSet) -> float:
    econ = params.econ
    if scheme is SchemeKind.V2G:
        return econ.v2g_charger_capex
    if scheme is SchemeKind.SMART_CHARGING:
        return econ.smart_charger_capex
    if scheme is SchemeKind.SMART_HEAT_PUMP:
        return econ.thermostat_capex
    return econ.thermostat_capex + econ.tank_capex_per_m3 * sizing.tank_volume


def _eol_per_asset(scheme: SchemeKind, sizing: SizingResult,
                   params: ParameterSet) -> float:
    if scheme is SchemeKind.V2G:
        return params.econ.v2g_eol_per_charger
    if scheme is SchemeKind.HP_THERMAL_STORAGE:
        return params.econ.tank_eol_per_m2 * sizing.tank_area
    return 0.0


def rebound_factor(scheme: SchemeKind, params: ParameterSet) -> float:
    """Grid energy drawn per unit of delivered demand reduction.

    V2G loses efficiency twice (discharge delivers eta from the battery,
    recharge draws 1/eta from the grid); load shifting moves energy at
    factor one, and tank losses are designed small enough to neglect.
    """
    if scheme is SchemeKind.V2G and params.assumptions.v2g_rebound_roundtrip:
        return 1.0 / params.ev.charger_efficiency ** 2
    return 1.0


def build_cash_flows(scheme: SchemeKind, app: ApplicationSpec,
                     sizing: SizingResult, params: ParameterSet) -> CashFlowSchedule:
    """Assemble the annual cash flows of a feasible sized pairing."""
    if not sizing.feasible:
        raise InfeasibleInput(sizing.reason)
    econ = params.econ
    n = sizing.contracted_assets
    investment = n * _capex_per_asset(scheme, sizing, params)
    annual_energy = app.annual_energy_mwh
    price_per_mwh = econ.electricity_price * 1000.0
    return CashFlowSchedule(
        investment_t0=investment,
        annual_om=econ.om_fraction * investment,
        annual_rewards=12.0 * n * monthly_reward_per_asset(scheme, sizing, params),
        annual_rebound=annual_energy * price_per_mwh * rebound_factor(scheme, params),
        eol_cost=n * _eol_per_asset(scheme, sizing, params),
        annual_energy=annual_energy,
        lifetime_years=econ.lifetime_years,
        discount_rate=econ.discount_rate,
    )


def _pv_components(cf: CashFlowSchedule):
    r, years = cf.discount_rate, cf.lifetime_years
    om = present_value_annual(cf.annual_om, r, years)
    rewards = present_value_annual(cf.annual_rewards, r, years)
    rebound = present_value_annual(cf.annual_rebound, r, years)
    eol = cf.eol_cost * (1.0 + r) ** -(years + 1)
    energy = present_value_annual(cf.annual_energy, r, years)
    return om, rewards, rebound, eol, energy


def lcodr_energy(cf: CashFlowSchedule) -> float:
    """Levelised cost per discounted MWh of shifted energy, $/MWh."""
    if cf.annual_energy <= 0:
        raise ZeroEnergy("annual shifted energy must be > 0")
    om, rewards, rebound, eol, energy = _pv_components(cf)
    return (cf.investment_t0 + om + rewards + rebound + eol) / energy


def lcodr_power(cf: CashFlowSchedule, power_capacity: float) -> float:
    """Levelised cost per discounted kW-year of capacity, $/kW-year."""
    if power_capacity <= 0:
        raise CostingError("power capacity must be > 0")
    om, rewards, rebound, eol, _ = _pv_components(cf)
    capacity_years = present_value_annual(power_capacity, cf.discount_rate,
                                          cf.lifetime_years)
    return (cf.investment_t0 + om + rewards + rebound + eol) / capacity_years


def apply_value_factor(lcodr: float, value_factor: float) -> float:
    """Divide a levelised cost by the availability-profile value factor."""
    if value_factor <= 0:
        raise NonPositiveValueFactor("value factor must be > 0")
    return lcodr / value_factor


@dataclass(frozen=True)
class PairingEvaluation:
    """Full outcome for one (scheme, application) pairing.

    status is 'ok', 'unsuitable' or 'infeasible'; breakdown is present only
    when status is 'ok'.
    """

    scheme: SchemeKind
    application: ApplicationSpec
    status: str
    reason: str = ""
    sizing: Optional[SizingResult] = None
    breakdown: Optional[CostBreakdown] = None

    @property
    def feasible(self) -> bool:
        return self.status == "ok"


def evaluate_pairing(scheme: SchemeKind, app: ApplicationSpec,
                     params: ParameterSet) -> PairingEvaluation:
    """Size, cost and value-adjust one pairing. Never raises for domain
    outcomes; unsuitable and infeasible pairings carry their reason."""
    if scheme not in app.suitable_schemes:
        return PairingEvaluation(scheme, app, "unsuitable",
                                 f"{scheme.value} cannot service {app.name!r}")
    sizing = size_pairing(scheme, app, params)
    if not sizing.feasible:
        return PairingEvaluation(scheme, app, "infeasible", sizing.reason,
                                 sizing=sizing)
    cf = build_cash_flows(scheme, app, sizing, params)
    om, rewards, rebound, eol, energy = _pv_components(cf)
    energy_cost = lcodr_energy(cf)
    vf = params.value_factors.for_scheme(scheme, sizing.binding_constraint)
    breakdown = CostBreakdown(
        investment=cf.investment_t0,
        om_pv=om, rewards_pv=rewards, rebound_pv=rebound, eol_pv=eol,
        energy_pv=energy,
        lcodr_energy=energy_cost,
        lcodr_power=lcodr_power(cf, app.power_capacity),
        value_factor=vf,
        lcodr_vf=apply_value_factor(energy_cost, vf),
    )
    return PairingEvaluation(scheme, app, "ok", sizing=sizing, breakdown=breakdown)
