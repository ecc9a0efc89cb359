"""Bundled datasets and file loaders.

Everything needed to run the full pipeline out of the box: a synthetic
electricity price series, synthetic availability profiles for each scheme,
and the storage-cost reference table. The national datasets behind the
published case study (charging sessions, heat-pump monitoring, half-hourly
market prices) are not redistributable; the synthetic stand-ins reproduce
their qualitative daily shapes — evening-peaked EV charging, morning and
evening heating peaks, overnight vehicle plug-in — and are deterministic
for a fixed seed.

CSV layouts:
  single series      timestamp,value
  energy boundaries  timestamp,lower,upper
  profile pool       asset_id,timestamp,value         (long format)
  storage reference  application,technology,lcos_usd_per_mwh
Timestamps are ISO 8601; naive timestamps are taken as UTC.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from typing import Dict, List, Optional, Tuple

import numpy as np

from .model import LcodrError, SchemeKind, TimeSeries, ValueFactorTable
from .valuefactor import (
    AvailabilityProfile,
    ProfileKind,
    v2g_value_factors,
    value_factor,
    align,
)


class DataError(LcodrError):
    """A data file violates its schema. Carries the first offending row."""

    def __init__(self, message: str, path: str = "", row: Optional[int] = None):
        self.path = path
        self.row = row
        where = path
        if row is not None:
            where = f"{path}:{row}" if path else f"row {row}"
        super().__init__(f"{where}: {message}" if where else message)


class MissingColumn(DataError):
    pass


class NonMonotonicTimestamps(DataError):
    pass


class IrregularSpacing(DataError):
    pass


class NonNumericValue(DataError):
    pass


# ---------------------------------------------------------------------------
# CSV loaders
# ---------------------------------------------------------------------------

def _parse_timestamp(text: str, path: str, row: int) -> datetime:
    try:
        ts = datetime.fromisoformat(text.strip())
    except ValueError:
        raise NonNumericValue(f"unparseable timestamp {text!r}", path, row) from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _parse_number(text: str, column: str, path: str, row: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise NonNumericValue(f"non-numeric {column} {text!r}", path, row) from None


def _read_rows(path: str, required: Tuple[str, ...]):
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise DataError("file not found", path) from None
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise MissingColumn(f"missing column {column!r} "
                                    f"(found {header})", path, row=1)
        rows = [(i, row) for i, row in enumerate(reader, start=2)]
    if not rows:
        raise DataError("file has a header but no data rows", path)
    return rows


def _check_grid(timestamps: List[datetime], row_numbers: List[int], path: str) -> float:
    """Validate strictly increasing, evenly spaced timestamps; returns the
    spacing in seconds."""
    deltas = [(timestamps[i] - timestamps[i - 1]).total_seconds()
              for i in range(1, len(timestamps))]
    for i, d in enumerate(deltas):
        if d <= 0:
            raise NonMonotonicTimestamps(
                f"timestamp does not increase (delta {d:.0f} s)",
                path, row_numbers[i + 1])
    interval = deltas[0]
    for i, d in enumerate(deltas):
        if abs(d - interval) > 1e-6:
            raise IrregularSpacing(
                f"spacing {d:.0f} s differs from first spacing {interval:.0f} s",
                path, row_numbers[i + 1])
    return interval


def load_timeseries_csv(path: str, unit: str = "") -> TimeSeries:
    """Load a `timestamp,value` CSV into a validated TimeSeries.

    Errors pinpoint the first offending row (1-based, header is row 1).
    """
    rows = _read_rows(path, ("timestamp", "value"))
    row_numbers, timestamps, values = [], [], []
    for i, row in rows:
        row_numbers.append(i)
        timestamps.append(_parse_timestamp(row["timestamp"], path, i))
        values.append(_parse_number(row["value"], "value", path, i))
    interval = _check_grid(timestamps, row_numbers, path)
    return TimeSeries(timestamps[0], interval, np.array(values), unit)


def load_boundary_csv(path: str, unit: str = "kWh") -> AvailabilityProfile:
    """Load a `timestamp,lower,upper` CSV into an energy-boundary profile."""
    rows = _read_rows(path, ("timestamp", "lower", "upper"))
    row_numbers, timestamps, lower, upper = [], [], [], []
    for i, row in rows:
        row_numbers.append(i)
        timestamps.append(_parse_timestamp(row["timestamp"], path, i))
        lower.append(_parse_number(row["lower"], "lower", path, i))
        upper.append(_parse_number(row["upper"], "upper", path, i))
    interval = _check_grid(timestamps, row_numbers, path)
    lo = TimeSeries(timestamps[0], interval, np.array(lower), unit)
    up = TimeSeries(timestamps[0], interval, np.array(upper), unit)
    return AvailabilityProfile(ProfileKind.V2G_ENERGY_BOUNDARIES, lo, upper=up)


def load_profile_pool_csv(path: str, kind: ProfileKind = ProfileKind.UNIDIRECTIONAL_LOAD,
                          unit: str = "kW") -> List[AvailabilityProfile]:
    """Load a long-format `asset_id,timestamp,value` CSV into one profile
    per asset. Assets appear in first-occurrence order; each asset's block
    must form a valid grid on its own."""
    rows = _read_rows(path, ("asset_id", "timestamp", "value"))
    per_asset: Dict[str, list] = {}
    for i, row in rows:
        per_asset.setdefault(row["asset_id"], []).append(
            (i, _parse_timestamp(row["timestamp"], path, i),
             _parse_number(row["value"], "value", path, i)))
    profiles = []
    for asset_id, entries in per_asset.items():
        row_numbers = [e[0] for e in entries]
        timestamps = [e[1] for e in entries]
        values = [e[2] for e in entries]
        if len(entries) < 2:
            raise DataError(f"asset {asset_id!r} has fewer than 2 rows",
                            path, row_numbers[0])
        interval = _check_grid(timestamps, row_numbers, path)
        series = TimeSeries(timestamps[0], interval, np.array(values), unit)
        profiles.append(AvailabilityProfile(kind, series, asset_id=asset_id))
    return profiles


@dataclass(frozen=True)
class LcosEntry:
    """One storage-technology cost reference for one application, $/MWh."""

    application: str
    technology: str
    lcos_usd_per_mwh: float


def load_lcos_reference(path: Optional[str] = None) -> List[LcosEntry]:
    """Load the storage-cost reference table; None loads the bundled file.

    The bundled values approximate published lifetime-cost projections for
    mature storage technologies and are user-replaceable.
    """
    if path is None:
        text = resources.files("lcodr").joinpath("lcos_reference.csv") \
            .read_text(encoding="utf-8")
        lines = text.splitlines()
        source = "<bundled lcos_reference.csv>"
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except FileNotFoundError:
            raise DataError("file not found", path) from None
        source = path
    reader = csv.DictReader(lines)
    header = reader.fieldnames or []
    for column in ("application", "technology", "lcos_usd_per_mwh"):
        if column not in header:
            raise MissingColumn(f"missing column {column!r} (found {header})",
                                source, row=1)
    entries = []
    for i, row in enumerate(reader, start=2):
        entries.append(LcosEntry(
            application=row["application"].strip(),
            technology=row["technology"].strip(),
            lcos_usd_per_mwh=_parse_number(row["lcos_usd_per_mwh"],
                                           "lcos_usd_per_mwh", source, i)))
    if not entries:
        raise DataError("file has a header but no data rows", source)
    return entries


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------

_START = datetime(2023, 1, 1, tzinfo=timezone.utc)
_HOUR = 3600.0


def _daily_gauss(hours: np.ndarray, center: float, width: float) -> np.ndarray:
    """Gaussian bump on the 24-hour circle."""
    d = np.abs(hours - center)
    d = np.minimum(d, 24.0 - d)
    return np.exp(-0.5 * (d / width) ** 2)


def _hour_axis(days: int) -> np.ndarray:
    return np.arange(days * 24) % 24.0


def synthetic_price(days: int = 365, seed: int = 0,
                    mean_usd_per_mwh: float = 50.0) -> TimeSeries:
    """Hourly electricity price with morning and evening peaks, an overnight
    trough, mild seasonality and seeded noise; mean normalized exactly."""
    hours = _hour_axis(days)
    day = np.arange(days * 24) / 24.0
    shape = (1.0
             + 0.35 * _daily_gauss(hours, 8.0, 1.6)
             + 0.55 * _daily_gauss(hours, 18.5, 2.0)
             - 0.30 * _daily_gauss(hours, 3.5, 2.5))
    seasonal = 1.0 + 0.15 * np.cos(2.0 * np.pi * (day - 15.0) / 365.25)
    rng = np.random.default_rng((seed, 0))
    noise = 1.0 + 0.08 * rng.standard_normal(days * 24)
    values = np.clip(shape * seasonal * noise, 0.05, None)
    values *= mean_usd_per_mwh / values.mean()
    return TimeSeries(_START, _HOUR, values, "$/MWh")


def synthetic_ev_charging_pool(n_assets: int = 200, days: int = 365,
                               seed: int = 0) -> List[AvailabilityProfile]:
    """Per-vehicle home-charging load: a single evening peak, heterogeneous
    in timing, width and magnitude, with day-to-day noise."""
    pool = []
    hours = _hour_axis(days)
    for a in range(n_assets):
        rng = np.random.default_rng((seed, 1, a))
        center = 19.0 + 1.8 * rng.standard_normal()
        width = rng.uniform(1.2, 2.8)
        magnitude = rng.uniform(0.8, 2.4)            # kW at the peak
        base = magnitude * _daily_gauss(hours, center, width)
        day_noise = np.repeat(np.clip(1.0 + 0.25 * rng.standard_normal(days),
                                      0.0, None), 24)
        values = base * day_noise
        series = TimeSeries(_START, _HOUR, values, "kW")
        pool.append(AvailabilityProfile(ProfileKind.UNIDIRECTIONAL_LOAD,
                                        series, asset_id=f"synthetic-ev-{a:03d}"))
    return pool


def synthetic_heating_pool(n_assets: int = 60, days: int = 365,
                           seed: int = 0) -> List[AvailabilityProfile]:
    """Per-dwelling heat-pump electricity demand: morning and evening peaks
    over a continuous base, amplified in winter."""
    pool = []
    hours = _hour_axis(days)
    day = np.arange(days * 24) / 24.0
    winter = 1.0 + 0.75 * np.cos(2.0 * np.pi * (day - 15.0) / 365.25)
    for a in range(n_assets):
        rng = np.random.default_rng((seed, 2, a))
        morning = rng.uniform(0.8, 1.2)
        evening = rng.uniform(0.9, 1.4)
        base = rng.uniform(0.25, 0.45)               # kW steady floor
        shape = (base
                 + morning * _daily_gauss(hours, 7.0 + 0.5 * rng.standard_normal(), 1.5)
                 + evening * _daily_gauss(hours, 19.0 + 0.5 * rng.standard_normal(), 2.0))
        day_noise = np.repeat(np.clip(1.0 + 0.15 * rng.standard_normal(days),
                                      0.0, None), 24)
        values = shape * winter * day_noise
        series = TimeSeries(_START, _HOUR, values, "kW")
        pool.append(AvailabilityProfile(ProfileKind.UNIDIRECTIONAL_LOAD,
                                        series, asset_id=f"synthetic-hp-{a:03d}"))
    return pool


def synthetic_v2g_profiles(days: int = 365, seed: int = 0,
                           battery_band_kwh: float = 42.0,
                           charger_power_kw: float = 6.8):
    """Aggregate V2G availability: dischargeable power and battery-energy
    boundaries for an overnight-plugged fleet, per vehicle.

    Plug-in probability is high from late afternoon through the morning
    commute and low at midday, so availability overlaps the evening price
    peak but also the cheap night hours — the value factors come out near
    unity. Returns (power profile, energy-boundaries profile).
    """
    hours = _hour_axis(days)
    rng = np.random.default_rng((seed, 3))
    plugged = (0.34
               + 0.52 * _daily_gauss(hours, 2.0, 5.5)
               + 0.28 * _daily_gauss(hours, 19.5, 2.5))
    plugged = np.clip(plugged * (1.0 + 0.05 * rng.standard_normal(len(hours))),
                      0.05, 1.0)
    # Not all plugged-in vehicles can discharge: some are replacing driving
    # energy, concentrated right after the evening arrival.
    charging = 0.30 * _daily_gauss(hours, 18.5, 1.5)
    discharge_power = charger_power_kw * np.clip(plugged - charging, 0.0, None)
    power = AvailabilityProfile(
        ProfileKind.V2G_POWER_BOUNDARY,
        TimeSeries(_START, _HOUR, discharge_power, "kW"),
        asset_id="synthetic-v2g-power")

    # Energy band: plugged-in share of the dischargeable battery band; the
    # band narrows while driving energy is being replaced.
    upper = battery_band_kwh * plugged
    lower = battery_band_kwh * np.clip(charging, 0.0, None) * plugged
    energy = AvailabilityProfile(
        ProfileKind.V2G_ENERGY_BOUNDARIES,
        TimeSeries(_START, _HOUR, lower, "kWh"),
        upper=TimeSeries(_START, _HOUR, upper, "kWh"),
        asset_id="synthetic-v2g-energy")
    return power, energy


# ---------------------------------------------------------------------------
# The bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DataBundle:
    """Everything the pipeline consumes, loaded and validated.

    provenance distinguishes transcribed constants from synthetic series.
    """

    price: TimeSeries
    ev_charging_pool: List[AvailabilityProfile]
    heating_pool: List[AvailabilityProfile]
    v2g_power: AvailabilityProfile
    v2g_energy: AvailabilityProfile
    lcos_reference: List[LcosEntry]
    provenance: Dict[str, str] = field(default_factory=dict)


def default_bundle(seed: int = 2024, days: int = 365) -> DataBundle:
    """The deterministic bundled dataset. Same seed, same bundle."""
    return DataBundle(
        price=synthetic_price(days=days, seed=seed),
        ev_charging_pool=synthetic_ev_charging_pool(days=days, seed=seed),
        heating_pool=synthetic_heating_pool(days=days, seed=seed),
        v2g_power=synthetic_v2g_profiles(days=days, seed=seed)[0],
        v2g_energy=synthetic_v2g_profiles(days=days, seed=seed)[1],
        lcos_reference=load_lcos_reference(),
        provenance={
            "price": "synthetic: two-peak daily shape, seasonal modulation, "
                     "seeded noise, mean normalized to 50 $/MWh",
            "ev_charging_pool": "synthetic: evening-peaked per-vehicle load",
            "heating_pool": "synthetic: bimodal morning/evening heating demand",
            "v2g_power": "synthetic: overnight-plugged dischargeable power",
            "v2g_energy": "synthetic: battery-energy boundaries",
            "lcos_reference": "approximate published lifetime-cost projections "
                              "for storage technologies; user-replaceable",
        })


def _pool_total(pool: List[AvailabilityProfile]) -> AvailabilityProfile:
    total = pool[0].series.values.copy()
    for prof in pool[1:]:
        total += prof.series.values
    return AvailabilityProfile(pool[0].kind,
                               pool[0].series.with_values(total),
                               asset_id="pool-total")


def bundle_value_factors(bundle: DataBundle):
    """Value factors computed from a data bundle.

    Returns (ValueFactorTable, details dict). The two heat-pump schemes
    share a single factor: their uncontrolled demand profile is the same.
    """
    vf_v2g_power, vf_v2g_energy = v2g_value_factors(
        bundle.price, bundle.v2g_power, bundle.v2g_energy)
    price_sc, sc_total, _ = align(bundle.price, _pool_total(bundle.ev_charging_pool))
    vf_sc = value_factor(price_sc, sc_total.series)
    price_hp, hp_total, _ = align(bundle.price, _pool_total(bundle.heating_pool))
    vf_hp = value_factor(price_hp, hp_total.series)
    table = ValueFactorTable(v2g_power=vf_v2g_power, v2g_energy=vf_v2g_energy,
                             smart_charging=vf_sc, heat_pump=vf_hp)
    details = {
        "v2g_power": vf_v2g_power,
        "v2g_energy": vf_v2g_energy,
        "smart_charging": vf_sc,
        "heat_pump": vf_hp,
    }
    return table, details
