"""Regionalization of national quantities and generation of per-region time series.

National technology potentials are split between regions by eligible land
area, national demand by a population/GDP mix, and annual energies are
expanded into time series through normalized profiles.  All operations
conserve the national totals they distribute.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

HOURS_PER_YEAR = 8760.0

SUMS_TO_ONE = "sums-to-one"
CAPACITY_FACTOR = "capacity-factor"

#: Land classes a technology class may occupy when splitting national
#: potentials.  Rooftop panels go on sealed surfaces, open-space panels and
#: onshore turbines on agricultural or forested land.
DEFAULT_LAND_ELIGIBILITY: dict[str, tuple[str, ...]] = {
    "pv_rooftop": ("urban", "suburban"),
    "pv_open": ("agricultural", "forested"),
    "wind_onshore": ("agricultural", "forested"),
}

#: Number of site-quality clusters per region when none is configured.
DEFAULT_QUALITY_CLUSTERS = 3

_SUM_TOL = 1e-9
_ENERGY_TOL = 1e-6


@dataclass(frozen=True)
class Profile:
    """A normalized time series at base (hourly) resolution.

    ``sums-to-one`` profiles are load shapes (values sum to 1 over the
    horizon); ``capacity-factor`` profiles are availability factors in
    [0, 1].
    """

    id: str
    values: tuple[float, ...]
    normalization: str = SUMS_TO_ONE

    def __post_init__(self) -> None:
        if self.normalization not in (SUMS_TO_ONE, CAPACITY_FACTOR):
            raise ValueError(f"profile {self.id}: unknown normalization {self.normalization!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError(f"profile {self.id}: empty")
        arr = np.asarray(self.values)
        if self.normalization == SUMS_TO_ONE:
            total = float(arr.sum())
            if abs(total - 1.0) > _SUM_TOL:
                raise ValueError(f"profile {self.id}: sums to {total!r}, expected 1")
            if (arr < 0).any():
                raise ValueError(f"profile {self.id}: negative share")
        else:
            if (arr < 0).any() or (arr > 1.0).any():
                raise ValueError(f"profile {self.id}: capacity factors outside [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class SiteClusterSpec:
    """Quality clustering of one technology's sites within one region."""

    technology: str
    region: str
    quality_weights: tuple[float, ...]
    base_profile: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "quality_weights", tuple(float(w) for w in self.quality_weights))
        if not self.quality_weights or any(w <= 0 for w in self.quality_weights):
            raise ValueError(f"cluster spec {self.technology}/{self.region}: weights must be positive")


def allocate_potential(
    national_potential: float,
    regions: Iterable,
    eligible_land_classes: Sequence[str],
) -> dict[str, float]:
    """Split a national potential (GW) between regions by eligible land area.

    Each region receives ``national * (eligible area / total eligible area)``
    where the eligible area is the sum of its ``land_shares`` over the given
    land classes.
    """
    if national_potential < 0:
        raise ValueError("national potential must be >= 0")
    areas: dict[str, float] = {}
    for region in regions:
        area = sum(float(region.land_shares.get(c, 0.0)) for c in eligible_land_classes)
        if area < 0:
            raise ValueError(f"region {region.id}: negative eligible area")
        areas[region.id] = area
    total = sum(areas.values())
    if total <= 0:
        raise ValueError("no region has eligible area for this technology")
    return {rid: national_potential * area / total for rid, area in areas.items()}


def disaggregate_demand(
    national: float,
    regions: Iterable,
    population_share: float = 0.5,
    gdp_share: float = 0.5,
) -> dict[str, float]:
    """Split national annual demand (TWh/y) between regions.

    The split key is ``population_share * pop_i/sum(pop) + gdp_share *
    gdp_i/sum(gdp)``; the two shares must sum to one.
    """
    if national < 0:
        raise ValueError("national demand must be >= 0")
    if abs(population_share + gdp_share - 1.0) > _SUM_TOL:
        raise ValueError("population_share + gdp_share must equal 1")
    if population_share < 0 or gdp_share < 0:
        raise ValueError("indicator shares must be >= 0")
    regions = list(regions)
    pop_total = sum(float(r.population) for r in regions)
    gdp_total = sum(float(r.gdp) for r in regions)
    if population_share > 0 and pop_total <= 0:
        if gdp_total <= 0:
            raise ValueError("total population and GDP are both zero")
        raise ValueError("population indicator requested but total population is zero")
    if gdp_share > 0 and gdp_total <= 0:
        raise ValueError("GDP indicator requested but total GDP is zero")
    out: dict[str, float] = {}
    for region in regions:
        key = 0.0
        if population_share > 0:
            key += population_share * float(region.population) / pop_total
        if gdp_share > 0:
            key += gdp_share * float(region.gdp) / gdp_total
        out[region.id] = national * key
    return out


def expand_to_series(annual_twh: float, profile: Profile, horizon_hours: int) -> np.ndarray:
    """Expand an annual energy (TWh/y) into MWh per base timestep.

    The profile must be sums-to-one with one value per timestep; the annual
    energy is scaled by ``horizon / 8760`` so that shorter horizons carry a
    proportional share of the year.
    """
    if profile.normalization != SUMS_TO_ONE:
        raise ValueError(f"profile {profile.id}: demand expansion needs a sums-to-one profile")
    if len(profile.values) != horizon_hours:
        raise ValueError(
            f"profile {profile.id}: length {len(profile.values)} != horizon {horizon_hours}"
        )
    if annual_twh < 0:
        raise ValueError("annual energy must be >= 0")
    scaled_mwh = annual_twh * 1e6 * (horizon_hours / HOURS_PER_YEAR)
    return scaled_mwh * profile.as_array()


def scale_cluster_profiles(
    base: Profile,
    quality_weights: Sequence[float],
    capacities: Sequence[float] | None = None,
) -> list[Profile]:
    """Derive per-cluster availability profiles from site-quality weights.

    Weights are relative site qualities; they are normalized so their
    capacity-weighted mean is one, which keeps the capacity-weighted energy
    across clusters equal to the base profile's energy.  Values pushed above
    a capacity factor of 1 are clipped and the clipped energy is
    redistributed uniformly over the cluster's unclipped hours until the
    cluster's target energy is restored.
    """
    if base.normalization != CAPACITY_FACTOR:
        raise ValueError(f"profile {base.id}: quality scaling needs a capacity-factor profile")
    weights = np.asarray([float(w) for w in quality_weights])
    if weights.size == 0 or (weights <= 0).any():
        raise ValueError("quality weights must be positive")
    if capacities is None:
        caps = np.ones_like(weights)
    else:
        caps = np.asarray([float(cpc) for cpc in capacities])
        if caps.shape != weights.shape or (caps <= 0).any():
            raise ValueError("capacities must be positive and match the weights")
    # normalize so the capacity-weighted mean weight is exactly one
    weights = weights * caps.sum() / float(caps @ weights)

    values = base.as_array()
    horizon = values.size
    base_energy = float(values.sum())
    out: list[Profile] = []
    for c, w in enumerate(weights):
        target = w * base_energy
        if target > horizon * (1.0 + _ENERGY_TOL):
            raise ValueError(
                f"profile {base.id}: cluster {c} target energy {target:.6g} exceeds "
                f"the horizon capacity {horizon}"
            )
        scaled = np.minimum(values * w, 1.0)
        # redistribute energy lost to clipping over unclipped hours
        for _ in range(horizon + 1):
            deficit = target - float(scaled.sum())
            if deficit <= _ENERGY_TOL * max(target, 1.0):
                break
            open_hours = scaled < 1.0 - 1e-12
            n_open = int(open_hours.sum())
            if n_open == 0:
                raise ValueError(
                    f"profile {base.id}: cluster {c} cannot preserve energy after clipping"
                )
            scaled[open_hours] = np.minimum(scaled[open_hours] + deficit / n_open, 1.0)
        else:
            raise ValueError(f"profile {base.id}: cluster {c} rebalancing did not converge")
        out.append(Profile(f"{base.id}#c{c}", tuple(scaled.tolist()), CAPACITY_FACTOR))
    return out
