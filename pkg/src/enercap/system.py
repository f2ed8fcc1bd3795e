"""Domain types for a multi-carrier, multi-region energy system instance.

Pure data with validation; all optimization logic lives in the LP builder.
Instances are immutable after construction and safe to share across
concurrent scenario solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .pipeline import Profile

CARRIER_KINDS = ("electricity", "hydrogen", "methane", "heat", "transport-service")
REGION_LEVELS = ("country", "subregion")
TECH_KINDS = ("generation", "storage", "conversion")
LAND_CLASSES = ("urban", "suburban", "agricultural", "forested")

#: Derating applied to intra-country electricity transfer capacity to
#: approximate AC load-flow restrictions in the transport model.
DEFAULT_DERATING = 0.7
DEFAULT_INTEREST_RATE = 0.02

DEFAULT_WAKE_THRESHOLD_GW = 50.0
DEFAULT_WAKE_FACTOR = 0.85


def _coerce(obj, floats: tuple[str, ...] = (), ints: tuple[str, ...] = ()) -> None:
    for name in floats:
        object.__setattr__(obj, name, float(getattr(obj, name)))
    for name in ints:
        object.__setattr__(obj, name, int(getattr(obj, name)))


@dataclass(frozen=True)
class Carrier:
    id: str
    kind: str
    resolution_hours: int = 1

    def __post_init__(self) -> None:
        _coerce(self, ints=("resolution_hours",))


@dataclass(frozen=True)
class Region:
    id: str
    level: str = "country"
    parent: str | None = None
    population: float = 0.0
    gdp: float = 0.0
    land_shares: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _coerce(self, floats=("population", "gdp"))
        # canonical dense map: every land class present
        shares = {cls: float(self.land_shares.get(cls, 0.0)) for cls in LAND_CLASSES}
        extra = set(self.land_shares) - set(LAND_CLASSES)
        if extra:
            raise ValueError(f"region {self.id}: unknown land classes {sorted(extra)}")
        object.__setattr__(self, "land_shares", shares)


@dataclass(frozen=True)
class Technology:
    """Generation, storage, or conversion archetype.

    Costs are overnight costs in EUR/kW (power) and EUR/kWh (storage
    energy), fixed O&M in EUR/kW/y, variable O&M in EUR/MWh.  Capacities and
    dispatch refer to the output carrier side.  ``potential`` bounds total
    installed capacity per region in GW; a region missing from a given map
    has zero potential, while ``potential=None`` leaves capacity unbounded.
    """

    id: str
    kind: str
    output_carrier: str
    input_carrier: str | None = None
    overnight_cost_power: float = 0.0
    overnight_cost_energy: float = 0.0
    fixed_om: float = 0.0
    variable_om: float = 0.0
    lifetime: float = 25.0
    efficiency: float = 1.0
    availability_profile_id: str | None = None
    potential: dict[str, float] | None = None
    existing_capacity: dict[str, float] = field(default_factory=dict)
    existing_energy_capacity: dict[str, float] = field(default_factory=dict)
    offshore: bool = False

    def __post_init__(self) -> None:
        _coerce(self, floats=("overnight_cost_power", "overnight_cost_energy", "fixed_om",
                              "variable_om", "lifetime", "efficiency"))
        # an empty potential map carries no information: treat as unbounded
        if self.potential is not None and not self.potential:
            object.__setattr__(self, "potential", None)
        for name in ("potential", "existing_capacity", "existing_energy_capacity"):
            mapping = getattr(self, name)
            if mapping:
                object.__setattr__(self, name, {k: float(v) for k, v in mapping.items()})


@dataclass(frozen=True)
class TransmissionLine:
    id: str
    carrier: str
    from_region: str
    to_region: str
    length_km: float
    existing_capacity: float = 0.0
    derating: float = DEFAULT_DERATING
    expandable: bool = False
    losses: float = 0.0

    def __post_init__(self) -> None:
        _coerce(self, floats=("length_km", "existing_capacity", "derating", "losses"))


@dataclass(frozen=True)
class DemandSpec:
    """Annual energy demand with a load shape and a flexibility window.

    ``flexibility_block_hours == 1`` means the hourly shape is binding;
    larger windows let the energy shift freely within each window.
    """

    carrier: str
    region: str
    annual_energy: float
    profile_id: str
    flexibility_block_hours: int = 1

    @property
    def id(self) -> str:
        return f"{self.carrier}/{self.region}/{self.profile_id}/{self.flexibility_block_hours}h"


@dataclass(frozen=True)
class SystemConfig:
    """Manifest defaults that shape costing and LP construction."""

    grid_unit_cost: float = 2.74e6  # EUR/km/GW
    grid_lifetime: float = 60.0
    h2_pipeline_cost_factor: float = 0.1  # vs. an electricity line of equal length
    slice_peak_multiple: float = 3.0
    eff_demand_factor: float = 610.0 / 1209.0


@dataclass(frozen=True)
class EnergySystem:
    carriers: tuple[Carrier, ...]
    regions: tuple[Region, ...]
    technologies: tuple[Technology, ...]
    lines: tuple[TransmissionLine, ...]
    demands: tuple[DemandSpec, ...]
    horizon_hours: int
    interest_rate: float = DEFAULT_INTEREST_RATE
    profiles: dict[str, Profile] = field(default_factory=dict)
    config: SystemConfig = field(default_factory=SystemConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "carriers", tuple(self.carriers))
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "technologies", tuple(self.technologies))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "demands", tuple(self.demands))
        for key, prof in self.profiles.items():
            if key != prof.id:
                raise ValueError(f"profile registry key {key!r} != profile id {prof.id!r}")
        object.__setattr__(self, "_by_id", {
            "carrier": {c.id: c for c in self.carriers},
            "region": {r.id: r for r in self.regions},
            "technology": {t.id: t for t in self.technologies},
            "line": {l.id: l for l in self.lines},
        })

    def _lookup(self, kind: str, key: str):
        try:
            return self._by_id[kind][key]
        except KeyError:
            raise KeyError(f"{kind} {key!r} not in system") from None

    def carrier(self, cid: str) -> Carrier:
        return self._lookup("carrier", cid)

    def region(self, rid: str) -> Region:
        return self._lookup("region", rid)

    def technology(self, tid: str) -> Technology:
        return self._lookup("technology", tid)

    def line(self, lid: str) -> TransmissionLine:
        return self._lookup("line", lid)

    def country_of(self, region_id: str) -> str:
        region = self.region(region_id)
        return region.parent if region.parent else region.id

    def profile(self, pid: str) -> Profile:
        try:
            return self.profiles[pid]
        except KeyError:
            raise KeyError(f"profile {pid!r} not attached to the system") from None

    def availability_profile(self, tech: Technology, region_id: str) -> Profile | None:
        """Per-region availability, falling back to the carrier-wide profile."""
        if tech.availability_profile_id is None:
            return None
        regional = f"{tech.availability_profile_id}@{region_id}"
        if regional in self.profiles:
            return self.profiles[regional]
        return self.profile(tech.availability_profile_id)


@dataclass(frozen=True)
class Violation:
    """One broken invariant: which entity, which rule, and the details."""

    entity: str
    rule: str
    detail: str

    def __str__(self) -> str:
        return f"{self.entity}: {self.rule} ({self.detail})"


def validate(system: EnergySystem) -> list[Violation]:
    """Check every type invariant; returns an empty list iff the system is sound."""
    out: list[Violation] = []
    add = out.append

    if system.horizon_hours < 1:
        add(Violation("system", "horizon must be >= 1 hour", str(system.horizon_hours)))
    if system.interest_rate < 0:
        add(Violation("system", "interest rate must be >= 0", str(system.interest_rate)))

    carrier_ids = {c.id for c in system.carriers}
    region_ids = {r.id for r in system.regions}
    _check_unique("carrier", (c.id for c in system.carriers), add)
    _check_unique("region", (r.id for r in system.regions), add)
    _check_unique("technology", (t.id for t in system.technologies), add)
    _check_unique("line", (l.id for l in system.lines), add)
    for kind, ids in (("carrier", system.carriers), ("region", system.regions),
                      ("technology", system.technologies), ("line", system.lines)):
        for item in ids:
            if not item.id or any(ch in item.id for ch in "|,;=\n\r"):
                add(Violation(f"{kind} {item.id!r}", "id must be non-empty without |,;= or newlines",
                              item.id))

    finest = min((c.resolution_hours for c in system.carriers), default=1)
    for c in system.carriers:
        if c.kind not in CARRIER_KINDS:
            add(Violation(f"carrier {c.id}", "unknown kind", c.kind))
        if c.resolution_hours < 1:
            add(Violation(f"carrier {c.id}", "resolution must be >= 1 hour", str(c.resolution_hours)))
            continue
        if system.horizon_hours % c.resolution_hours != 0:
            add(Violation(f"carrier {c.id}", "resolution must divide the horizon",
                          f"{c.resolution_hours} !| {system.horizon_hours}"))
        if c.resolution_hours % finest != 0:
            add(Violation(f"carrier {c.id}", "resolution must be a multiple of the finest resolution",
                          f"{c.resolution_hours} vs {finest}"))

    for r in system.regions:
        if r.level not in REGION_LEVELS:
            add(Violation(f"region {r.id}", "unknown level", r.level))
        if r.level == "subregion":
            if r.parent is None:
                add(Violation(f"region {r.id}", "subregion needs a parent country", "parent missing"))
            elif r.parent not in region_ids:
                add(Violation(f"region {r.id}", "parent must exist", r.parent))
            else:
                parent = system.region(r.parent)
                if parent.level != "country":
                    add(Violation(f"region {r.id}", "parent must be a country", r.parent))
        elif r.parent is not None:
            add(Violation(f"region {r.id}", "countries have no parent", r.parent))
        if r.population < 0:
            add(Violation(f"region {r.id}", "population must be >= 0", str(r.population)))
        if r.gdp < 0:
            add(Violation(f"region {r.id}", "GDP must be >= 0", str(r.gdp)))
        for cls, area in r.land_shares.items():
            if area < 0:
                add(Violation(f"region {r.id}", "land areas must be >= 0", f"{cls}={area}"))

    for t in system.technologies:
        ent = f"technology {t.id}"
        if t.kind not in TECH_KINDS:
            add(Violation(ent, "unknown kind", t.kind))
        if t.output_carrier not in carrier_ids:
            add(Violation(ent, "output carrier must exist", t.output_carrier))
        if t.input_carrier is not None and t.input_carrier not in carrier_ids:
            add(Violation(ent, "input carrier must exist", str(t.input_carrier)))
        if t.kind == "conversion" and t.input_carrier is None:
            add(Violation(ent, "conversion needs an input carrier", "input missing"))
        if t.kind == "generation" and t.input_carrier is not None:
            add(Violation(ent, "generation must not consume a carrier", str(t.input_carrier)))
        if t.kind == "storage" and t.input_carrier is not None:
            add(Violation(ent, "storage operates on its output carrier only", str(t.input_carrier)))
        if not 0.0 < t.efficiency <= 1.0:
            add(Violation(ent, "efficiency must be in (0, 1]", str(t.efficiency)))
        if t.lifetime <= 0:
            add(Violation(ent, "lifetime must be > 0", str(t.lifetime)))
        if t.kind != "storage" and t.overnight_cost_energy != 0.0:
            add(Violation(ent, "energy cost applies to storage only", str(t.overnight_cost_energy)))
        for name, value in (("power cost", t.overnight_cost_power),
                            ("energy cost", t.overnight_cost_energy),
                            ("fixed O&M", t.fixed_om)):
            if value < 0:
                add(Violation(ent, f"{name} must be >= 0", str(value)))
        for label, mapping in (("potential", t.potential or {}),
                               ("existing capacity", t.existing_capacity),
                               ("existing energy capacity", t.existing_energy_capacity)):
            for rid, gw in mapping.items():
                if rid not in region_ids:
                    add(Violation(ent, f"{label} references unknown region", rid))
                if gw < 0:
                    add(Violation(ent, f"{label} must be >= 0", f"{rid}={gw}"))

    for l in system.lines:
        ent = f"line {l.id}"
        if l.from_region == l.to_region:
            add(Violation(ent, "self-loop forbidden", l.from_region))
        for rid in (l.from_region, l.to_region):
            if rid not in region_ids:
                add(Violation(ent, "endpoint must exist", rid))
        if l.carrier not in carrier_ids:
            add(Violation(ent, "carrier must exist", l.carrier))
        if not 0.0 < l.derating <= 1.0:
            add(Violation(ent, "derating must be in (0, 1]", str(l.derating)))
        if l.length_km <= 0:
            add(Violation(ent, "length must be > 0", str(l.length_km)))
        if l.existing_capacity < 0:
            add(Violation(ent, "existing capacity must be >= 0", str(l.existing_capacity)))
        if not 0.0 <= l.losses < 1.0:
            add(Violation(ent, "losses must be in [0, 1)", str(l.losses)))

    for d in system.demands:
        ent = f"demand {d.id}"
        if d.carrier not in carrier_ids:
            add(Violation(ent, "carrier must exist", d.carrier))
        if d.region not in region_ids:
            add(Violation(ent, "region must exist", d.region))
        if d.annual_energy < 0:
            add(Violation(ent, "annual energy must be >= 0", str(d.annual_energy)))
        if d.flexibility_block_hours < 1:
            add(Violation(ent, "flexibility window must be >= 1 hour", str(d.flexibility_block_hours)))
        elif d.carrier in carrier_ids:
            res = system.carrier(d.carrier).resolution_hours
            f = d.flexibility_block_hours
            if res >= 1 and f % res != 0 and res % f != 0:
                add(Violation(ent, "flexibility window and carrier resolution must nest",
                              f"{f}h vs {res}h"))
            if system.horizon_hours % f != 0:
                add(Violation(ent, "flexibility window must divide the horizon",
                              f"{f} !| {system.horizon_hours}"))

    out.extend(_check_supply_paths(system, region_ids, carrier_ids))
    return out


def _check_unique(kind: str, ids, add) -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            add(Violation(f"{kind} {i}", "duplicate id", i))
        seen.add(i)


def _supplied_fixpoint(system: EnergySystem) -> set[tuple[str, str]]:
    """(carrier, region) pairs reachable from primary generation."""
    supplied: set[tuple[str, str]] = set()
    for t in system.technologies:
        if t.input_carrier is not None:
            continue
        for r in system.regions:
            if _tech_present(t, r.id):
                supplied.add((t.output_carrier, r.id))
    changed = True
    while changed:
        changed = False
        for t in system.technologies:
            if t.input_carrier is None:
                continue
            for r in system.regions:
                key = (t.output_carrier, r.id)
                if key in supplied or not _tech_present(t, r.id):
                    continue
                if (t.input_carrier, r.id) in supplied:
                    supplied.add(key)
                    changed = True
        for l in system.lines:
            for src, dst in ((l.from_region, l.to_region), (l.to_region, l.from_region)):
                key = (l.carrier, dst)
                if key not in supplied and (l.carrier, src) in supplied:
                    supplied.add(key)
                    changed = True
    return supplied


def _tech_present(tech: Technology, region_id: str) -> bool:
    if tech.existing_capacity.get(region_id, 0.0) > 0:
        return True
    if tech.potential is None:
        return True
    return tech.potential.get(region_id, 0.0) > 0


def _check_supply_paths(system, region_ids, carrier_ids) -> list[Violation]:
    demanded = {
        (d.carrier, d.region)
        for d in system.demands
        if d.annual_energy > 0 and d.carrier in carrier_ids and d.region in region_ids
    }
    if not demanded:
        return []
    supplied = _supplied_fixpoint(system)
    return [
        Violation(f"demand for {c} in {r}", "no producing or importing pathway", "structurally unservable")
        for (c, r) in sorted(demanded)
        if (c, r) not in supplied
    ]


def offshore_blocks(
    potential: float,
    wake_threshold: float = DEFAULT_WAKE_THRESHOLD_GW,
    wake_factor: float = DEFAULT_WAKE_FACTOR,
) -> list[tuple[float, float]]:
    """Split an offshore potential into (capacity GW, availability scale) blocks.

    Capacity up to the wake threshold keeps its full availability; capacity
    beyond it sees wake-reduced full load hours, scaled by ``wake_factor``.
    Block capacities always sum to the input potential.
    """
    if potential < 0 or wake_threshold < 0:
        raise ValueError("potential and wake threshold must be >= 0")
    if not 0.0 < wake_factor <= 1.0:
        raise ValueError("wake factor must be in (0, 1]")
    if math.isnan(potential) or math.isnan(wake_threshold):
        raise ValueError("inputs must be numbers")
    blocks: list[tuple[float, float]] = []
    head = min(potential, wake_threshold)
    if head > 0:
        blocks.append((head, 1.0))
    tail = potential - head
    if tail > 0:
        blocks.append((tail, wake_factor))
    return blocks
