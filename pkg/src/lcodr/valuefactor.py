"""Value factors from aligned price and availability time series.

The value factor compares the price-weighted availability of a DR scheme
with a flat, always-available profile. A constant availability (or a
constant price) gives exactly 1; values above 1 mean the scheme tends to be
available when electricity is expensive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import LcodrError, TimeSeries


class ValueFactorError(LcodrError):
    pass


class NoOverlap(ValueFactorError):
    pass


class IncompatibleIntervals(ValueFactorError):
    pass


class ZeroAvailabilityMean(ValueFactorError):
    pass


class ZeroPriceSum(ValueFactorError):
    pass


class TooFewAssets(ValueFactorError):
    pass


class ProfileKind(enum.Enum):
    UNIDIRECTIONAL_LOAD = "unidirectional_load"
    V2G_POWER_BOUNDARY = "v2g_power_boundary"
    V2G_ENERGY_BOUNDARIES = "v2g_energy_boundaries"


@dataclass(frozen=True)
class AvailabilityProfile:
    """A DR availability series: uncontrolled load, dischargeable power, or a
    pair of battery-energy boundaries (lower/upper)."""

    kind: ProfileKind
    series: TimeSeries
    upper: Optional[TimeSeries] = None   # energy-boundary kind only
    asset_id: str = ""

    def __post_init__(self):
        if self.kind is ProfileKind.V2G_ENERGY_BOUNDARIES:
            if self.upper is None:
                raise ValueFactorError("energy boundaries need lower and upper series")
            if (len(self.upper) != len(self.series)
                    or self.upper.start != self.series.start
                    or self.upper.interval_seconds != self.series.interval_seconds):
                raise ValueFactorError("energy boundary series must share one grid")
            if np.any(self.upper.values < self.series.values - 1e-9):
                raise ValueFactorError("upper energy boundary below lower boundary")
        else:
            if self.upper is not None:
                raise ValueFactorError(f"{self.kind.value} takes a single series")
            if np.any(self.series.values < 0):
                raise ValueFactorError("availability values must be >= 0")

    def band(self) -> TimeSeries:
        """Usable series: the boundary difference for energy kinds, the
        series itself otherwise."""
        if self.kind is ProfileKind.V2G_ENERGY_BOUNDARIES:
            return self.series.with_values(self.upper.values - self.series.values)
        return self.series


@dataclass(frozen=True)
class AlignmentReport:
    dropped_head_a: int
    dropped_tail_a: int
    dropped_head_b: int
    dropped_tail_b: int


def _coarsen(series: TimeSeries, ratio: int) -> TimeSeries:
    """Average consecutive blocks of `ratio` points; trims a partial tail."""
    if ratio == 1:
        return series
    n = (len(series) // ratio) * ratio
    vals = series.values[:n].reshape(-1, ratio).mean(axis=1)
    return TimeSeries(series.start, series.interval_seconds * ratio, vals, series.unit)


def align_series(a: TimeSeries, b: TimeSeries):
    """Put two series on their coarser common grid over the overlapping range.

    Intervals must be equal or related by an integer ratio; the finer series
    is averaged into the coarser buckets. Returns (a, b, AlignmentReport).
    """
    ia, ib = a.interval_seconds, b.interval_seconds
    coarse = max(ia, ib)
    fine = min(ia, ib)
    ratio = coarse / fine
    if abs(ratio - round(ratio)) > 1e-9:
        raise IncompatibleIntervals(
            f"intervals {ia} s and {ib} s are not integer-related")
    ratio = int(round(ratio))

    start = max(a.start, b.start)
    end = min(a.end, b.end)
    if start >= end:
        raise NoOverlap("series do not overlap in time")
    # The coarse grid anchors bucket boundaries; the fine series must hit
    # those boundaries exactly.
    coarse_series, fine_series = (a, b) if ia >= ib else (b, a)
    offset = (start - fine_series.start).total_seconds()
    shift = (start - coarse_series.start).total_seconds()
    if abs(offset % fine - 0.0) > 1e-6 and abs(offset % fine - fine) > 1e-6:
        raise IncompatibleIntervals("series grids are phase-shifted")
    if abs(shift % coarse) > 1e-6 and abs(shift % coarse - coarse) > 1e-6:
        # align the overlap start up to the next coarse boundary
        from datetime import timedelta
        bump = coarse - (shift % coarse)
        start = start + timedelta(seconds=bump)
        if start >= end:
            raise NoOverlap("series do not overlap on a common grid")

    def crop(series: TimeSeries):
        head = int(round((start - series.start).total_seconds()
                         / series.interval_seconds))
        span = int((end - start).total_seconds() // series.interval_seconds)
        tail = len(series) - head - span
        return series.values[head:head + span], head, tail

    va, head_a, tail_a = crop(a)
    vb, head_b, tail_b = crop(b)
    a2 = TimeSeries(start, ia, va, a.unit)
    b2 = TimeSeries(start, ib, vb, b.unit)
    if ia < coarse:
        a2 = _coarsen(a2, ratio)
    if ib < coarse:
        b2 = _coarsen(b2, ratio)
    n = min(len(a2), len(b2))
    if n < 2:
        raise NoOverlap("fewer than two common intervals after alignment")
    a2 = TimeSeries(a2.start, coarse, a2.values[:n], a2.unit)
    b2 = TimeSeries(b2.start, coarse, b2.values[:n], b2.unit)
    report = AlignmentReport(head_a, tail_a, head_b, tail_b)
    return a2, b2, report


def align(price: TimeSeries, profile: AvailabilityProfile):
    """Align a price series with an availability profile. Returns the pair
    (price, profile) on the common grid plus the alignment report."""
    band = profile.band()
    price2, band2, report = align_series(price, band)
    aligned = AvailabilityProfile(ProfileKind.UNIDIRECTIONAL_LOAD
                                  if profile.kind is ProfileKind.V2G_ENERGY_BOUNDARIES
                                  else profile.kind,
                                  band2, asset_id=profile.asset_id)
    return price2, aligned, report


def value_factor(price: TimeSeries, availability: TimeSeries) -> float:
    """Price-weighted availability relative to a flat profile.

    Both series must already share one grid. Scale-invariant in both the
    price and the availability; negative prices are accepted.
    """
    if len(price) != len(availability):
        raise ValueFactorError("price and availability must have equal length")
    p = price.values
    a = availability.values
    mean_avail = a.mean()
    if mean_avail <= 0:
        raise ZeroAvailabilityMean("availability series has non-positive mean")
    price_sum = p.sum()
    if price_sum == 0:
        raise ZeroPriceSum("price series sums to zero")
    return float((p * a).sum() / (mean_avail * price_sum))


def v2g_value_factors(price: TimeSeries, power_boundary: AvailabilityProfile,
                      energy_boundaries: AvailabilityProfile):
    """Separate value factors for V2G power and energy availability.

    Returns (vf_power, vf_energy); the energy variant weights the width of
    the battery-energy band.
    """
    price_p, power, _ = align(price, power_boundary)
    vf_power = value_factor(price_p, power.series)
    price_e, band, _ = align(price, energy_boundaries)
    vf_energy = value_factor(price_e, band.series)
    return vf_power, vf_energy


@dataclass(frozen=True)
class VfDistribution:
    """Subsample sensitivity result: one value factor per iteration."""

    samples: np.ndarray
    mean: float
    median: float
    p5: float
    p95: float

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "VfDistribution":
        samples = np.asarray(samples, dtype=np.float64)
        samples.flags.writeable = False
        return cls(samples=samples,
                   mean=float(samples.mean()),
                   median=float(np.percentile(samples, 50)),
                   p5=float(np.percentile(samples, 5)),
                   p95=float(np.percentile(samples, 95)))


def vf_subsample_mc(profiles: Sequence[AvailabilityProfile], price: TimeSeries,
                    subset_size: int = 50, iterations: int = 1000,
                    seed: int = 0) -> VfDistribution:
    """Sensitivity of the value factor to which assets happen to be in the
    pool: repeatedly draw `subset_size` assets without replacement, sum their
    profiles and recompute the value factor.

    Deterministic for a fixed seed; each iteration derives its own generator
    from (seed, iteration), so iterations are order-independent.
    """
    if len(profiles) < subset_size:
        raise TooFewAssets(
            f"need at least {subset_size} asset profiles, got {len(profiles)}")
    aligned = [align(price, prof) for prof in profiles]
    price0 = aligned[0][0]
    stacks = []
    for price_i, prof_i, _ in aligned:
        if len(price_i) != len(price0) or price_i.start != price0.start:
            raise ValueFactorError("asset profiles must share one grid")
        stacks.append(prof_i.series.values)
    pool = np.stack(stacks)

    samples = np.empty(iterations)
    for i in range(iterations):
        rng = np.random.default_rng((seed, i))
        idx = rng.choice(len(profiles), size=subset_size, replace=False)
        total = pool[idx].sum(axis=0)
        samples[i] = value_factor(price0, price0.with_values(total))
    return VfDistribution.from_samples(samples)
