"""Levelised cost of demand response (LCODR) toolkit.

Sizes direct-load-control fleets against storage applications, builds
discounted lifetime cash flows, computes availability-profile value factors
from time series, and propagates input uncertainty by Monte-Carlo — as a
deterministic library plus a batch CLI (``lcodr``).
"""

from .model import (
    ApplicationSpec,
    Assumptions,
    BindingConstraint,
    CostBreakdown,
    EconomicParameters,
    EvParameters,
    HeatParameters,
    LcodrError,
    ParameterSet,
    ParseError,
    SchemeKind,
    SizingResult,
    TimeSeries,
    ValidationError,
    ValueFactorTable,
    default_applications,
    default_parameters,
    load_config,
)
from .sizing import size_pairing
from .costing import (
    CashFlowSchedule,
    PairingEvaluation,
    build_cash_flows,
    evaluate_pairing,
    lcodr_energy,
    lcodr_power,
)
from .valuefactor import AvailabilityProfile, ProfileKind, value_factor, vf_subsample_mc
from .uncertainty import (
    McConfig,
    McDistribution,
    cheapest_probability,
    perturb_parameters,
    run_monte_carlo,
)
from .data import DataBundle, bundle_value_factors, default_bundle, load_lcos_reference

__version__ = "0.1.0"

__all__ = [
    "ApplicationSpec", "Assumptions", "AvailabilityProfile", "BindingConstraint",
    "CashFlowSchedule", "CostBreakdown", "DataBundle", "EconomicParameters",
    "EvParameters", "HeatParameters", "LcodrError", "McConfig", "McDistribution",
    "PairingEvaluation", "ParameterSet", "ParseError", "ProfileKind", "SchemeKind",
    "SizingResult", "TimeSeries", "ValidationError", "ValueFactorTable",
    "__version__", "build_cash_flows", "bundle_value_factors", "cheapest_probability",
    "default_applications", "default_bundle", "default_parameters",
    "evaluate_pairing", "lcodr_energy", "lcodr_power", "load_config",
    "load_lcos_reference", "perturb_parameters", "run_monte_carlo", "size_pairing",
    "value_factor", "vf_subsample_mc",
]
