"""Annualization of overnight investment costs and grid expansion pricing.

Overnight costs are converted to equivalent yearly payments with the
standard annuity formula; fixed O&M is added after annualization.  Grid
expansion is priced per GW from line length and a unit cost per km and GW.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .system import Technology

KW_PER_GW = 1e6
KWH_PER_GWH = 1e6


@dataclass(frozen=True)
class CostingConfig:
    interest_rate: float = 0.02
    grid_unit_cost: float = 2.74e6  # EUR/km/GW
    grid_lifetime: float = 60.0
    h2_pipeline_cost_factor: float = 0.1

    def __post_init__(self) -> None:
        if self.interest_rate < 0:
            raise ValueError("interest rate must be >= 0")
        if self.grid_unit_cost <= 0:
            raise ValueError("grid unit cost must be > 0")
        if self.grid_lifetime <= 0:
            raise ValueError("grid lifetime must be > 0")


def annuity_factor(rate: float, lifetime_years: float) -> float:
    """Yearly payment per unit of capital over the asset lifetime.

    ``rate / (1 - (1 + rate)^-lifetime)``; the zero-rate limit is
    straight-line depreciation ``1 / lifetime``.
    """
    if lifetime_years < 1:
        raise ValueError(f"lifetime must be >= 1 year, got {lifetime_years}")
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    if rate == 0.0:
        return 1.0 / lifetime_years
    # expm1/log1p form stays accurate for rates near zero
    denom = -math.expm1(-lifetime_years * math.log1p(rate))
    return rate / denom


def annualize_technology(tech: "Technology", cfg: CostingConfig) -> tuple[float, float]:
    """Annualized investment cost as (EUR/GW/y on power, EUR/GWh/y on energy)."""
    af = annuity_factor(cfg.interest_rate, tech.lifetime)
    power = (tech.overnight_cost_power * af + tech.fixed_om) * KW_PER_GW
    energy = tech.overnight_cost_energy * af * KWH_PER_GWH
    return power, energy


def line_expansion_cost(length_km: float, cfg: CostingConfig, *, hydrogen: bool = False) -> float:
    """Annualized expansion cost of one line in EUR/GW/y.

    Hydrogen pipelines are priced as a configurable fraction of an
    electricity line of equal length (pipeline upgrade, not a new build).
    """
    if length_km <= 0:
        raise ValueError(f"line length must be > 0 km, got {length_km}")
    unit = cfg.grid_unit_cost * (cfg.h2_pipeline_cost_factor if hydrogen else 1.0)
    return length_km * unit * annuity_factor(cfg.interest_rate, cfg.grid_lifetime)
