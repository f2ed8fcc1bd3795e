"""Translate an energy system into a sparse standard-form LP.

Variables: new capacity per (technology, region), storage energy capacity,
line expansion, dispatch per time block, storage charge/discharge/level,
directed line flows, and demand slices inside flexibility windows.  Power
variables are in GW averaged over their block, energies in GWh, costs in
EUR per year (operational terms are scaled by 8760/horizon so investment
and dispatch costs stay comparable on short horizons).

Scenario overlays (grid relaxation, fixed investments, expansion bans,
offshore targets, expansion caps) are applied to a finished problem and
never mutate it in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import timegrid as tg
from .costing import CostingConfig, annualize_technology, line_expansion_cost
from .lp import EQUAL, GREATER, INF, LESS, LpProblem, LpSolution
from .pipeline import HOURS_PER_YEAR, expand_to_series
from .system import EnergySystem, Technology, validate

MWH_PER_GWH = 1000.0

REF, EFF = "REF", "EFF"


class BuildError(ValueError):
    pass


@dataclass(frozen=True)
class SeriesRef:
    """A contiguous run of LP columns indexed by time block."""

    start: int
    count: int
    step_hours: int

    def col(self, k: int) -> int:
        if not 0 <= k < self.count:
            raise IndexError(f"block {k} outside [0, {self.count})")
        return self.start + k

    def cols(self) -> range:
        return range(self.start, self.start + self.count)


@dataclass
class LineInfo:
    length_km: float
    existing_gw: float
    expandable: bool
    carrier_kind: str
    intra_country: bool
    from_region: str = ""
    to_region: str = ""


@dataclass
class VariableCatalog:
    """Bijection between semantic entries and LP column indices."""

    col_names: list[str] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    cap: dict[tuple[str, str], int] = field(default_factory=dict)
    ecap: dict[tuple[str, str], int] = field(default_factory=dict)
    xline: dict[str, int] = field(default_factory=dict)
    dispatch: dict[tuple[str, str], SeriesRef] = field(default_factory=dict)
    charge: dict[tuple[str, str], SeriesRef] = field(default_factory=dict)
    discharge: dict[tuple[str, str], SeriesRef] = field(default_factory=dict)
    level: dict[tuple[str, str], SeriesRef] = field(default_factory=dict)
    flow: dict[tuple[str, int], SeriesRef] = field(default_factory=dict)
    slices: dict[int, SeriesRef] = field(default_factory=dict)
    window_energy: dict[int, np.ndarray] = field(default_factory=dict)
    window_width: dict[int, int] = field(default_factory=dict)
    fcap_rows: dict[str, list[int]] = field(default_factory=dict)
    balance_rows: dict[tuple[str, str], range] = field(default_factory=dict)
    line_info: dict[str, LineInfo] = field(default_factory=dict)
    offshore_caps: list[int] = field(default_factory=list)
    offshore_existing_gw: float = 0.0
    offshore_potential_gw: float = 0.0
    horizon_hours: int = 0
    year_scale: float = 1.0
    objective: np.ndarray = field(default_factory=lambda: np.zeros(0))
    assumptions: tuple[str, ...] = ()

    def investment_columns(self, include_lines: bool = False) -> dict[str, int]:
        """Capacity-defining columns; line expansion only on request."""
        out = {}
        for (tid, rid), j in self.cap.items():
            out[f"cap|{tid}|{rid}"] = j
        for (tid, rid), j in self.ecap.items():
            out[f"ecap|{tid}|{rid}"] = j
        if include_lines:
            for lid, j in self.xline.items():
                out[f"xln|{lid}"] = j
        return out


def tech_is_active(tech: Technology, region_id: str) -> bool:
    if tech.potential is None:
        return True
    return tech.potential.get(region_id, 0.0) > 0 or tech.existing_capacity.get(region_id, 0.0) > 0


def dispatch_resolution(system: EnergySystem, tech: Technology) -> int:
    r_out = system.carrier(tech.output_carrier).resolution_hours
    if tech.input_carrier is None:
        return r_out
    r_in = system.carrier(tech.input_carrier).resolution_hours
    return math.gcd(r_out, r_in)


def apply_demand_variant(system: EnergySystem, variant: str) -> EnergySystem:
    """REF keeps demands; EFF scales every annual energy by the configured factor."""
    if variant == REF:
        return system
    if variant != EFF:
        raise BuildError(f"unknown demand variant {variant!r}")
    f = system.config.eff_demand_factor
    demands = tuple(replace(d, annual_energy=d.annual_energy * f) for d in system.demands)
    return replace(system, demands=demands)


class _Assembler:
    def __init__(self, name: str):
        self.name = name
        self.col_names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.obj: list[float] = []
        self.row_names: list[str] = []
        self.sense: list[str] = []
        self.rhs: list[float] = []
        self.tri: dict[tuple[int, int], float] = {}

    def col(self, name: str, lb: float = 0.0, ub: float = INF, obj: float = 0.0) -> int:
        self.col_names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        self.obj.append(obj)
        return len(self.col_names) - 1

    def row(self, name: str, sense: str, rhs: float = 0.0) -> int:
        self.row_names.append(name)
        self.sense.append(sense)
        self.rhs.append(rhs)
        return len(self.row_names) - 1

    def put(self, row: int, col: int, value: float) -> None:
        if value != 0.0:
            key = (row, col)
            self.tri[key] = self.tri.get(key, 0.0) + value

    def finish(self) -> LpProblem:
        items = sorted(self.tri.items())
        return LpProblem(
            name=self.name,
            obj=np.array(self.obj, dtype=float),
            row_idx=np.array([k[0] for k, _ in items], dtype=np.int64),
            col_idx=np.array([k[1] for k, _ in items], dtype=np.int64),
            coef=np.array([v for _, v in items], dtype=float),
            sense=list(self.sense),
            rhs=np.array(self.rhs, dtype=float),
            lb=np.array(self.lb, dtype=float),
            ub=np.array(self.ub, dtype=float),
            col_names=list(self.col_names),
            row_names=list(self.row_names),
        )


def build(
    system: EnergySystem,
    scenario=None,
    grid: tg.TimeGrid | None = None,
) -> tuple[LpProblem, VariableCatalog]:
    """Build the LP for a validated system, optionally under a scenario.

    A scenario object provides ``kind``, ``value`` and ``demand_variant``;
    the two-phase disintegrated procedure cannot be expressed as a single
    problem and lives in the orchestrator.
    """
    violations = validate(system)
    if violations:
        details = "; ".join(str(v) for v in violations[:8])
        raise BuildError(f"system is invalid ({len(violations)} violations): {details}")

    variant = getattr(scenario, "demand_variant", REF) if scenario is not None else REF
    system = apply_demand_variant(system, variant)

    if grid is None:
        grid = tg.build(system.horizon_hours, {c.id: c.resolution_hours for c in system.carriers})

    problem, catalog = _build_core(system, grid)

    kind = getattr(scenario, "kind", "integrated") if scenario is not None else "integrated"
    if kind == "disintegrated":
        raise BuildError("the disintegrated scenario is two-phase; use the orchestrator")
    if kind != "integrated":
        problem = apply_scenario_overlay(
            problem, catalog, Overlay(kind=kind, value=getattr(scenario, "value", None))
        )
    return problem, catalog


def _build_core(system: EnergySystem, grid: tg.TimeGrid) -> tuple[LpProblem, VariableCatalog]:
    asm = _Assembler("energy-system")
    cat = VariableCatalog(horizon_hours=grid.horizon_hours,
                          year_scale=HOURS_PER_YEAR / grid.horizon_hours)
    notes: list[str] = []
    cfg = CostingConfig(
        interest_rate=system.interest_rate,
        grid_unit_cost=system.config.grid_unit_cost,
        grid_lifetime=system.config.grid_lifetime,
        h2_pipeline_cost_factor=system.config.h2_pipeline_cost_factor,
    )
    yr = cat.year_scale
    regions = [r.id for r in system.regions]

    # -- which (carrier, region) pairs need balance rows -------------------
    participating: set[tuple[str, str]] = set()
    for t in system.technologies:
        for rid in regions:
            if tech_is_active(t, rid):
                participating.add((t.output_carrier, rid))
                if t.input_carrier is not None:
                    participating.add((t.input_carrier, rid))
    for l in system.lines:
        participating.add((l.carrier, l.from_region))
        participating.add((l.carrier, l.to_region))
    for d in system.demands:
        participating.add((d.carrier, d.region))

    for c in system.carriers:
        K = grid.block_count(c.id)
        for rid in regions:
            if (c.id, rid) not in participating:
                continue
            start = asm.row(f"bal|{c.id}|{rid}|0", EQUAL, 0.0)
            for k in range(1, K):
                asm.row(f"bal|{c.id}|{rid}|{k}", EQUAL, 0.0)
            cat.balance_rows[(c.id, rid)] = range(start, start + K)

    def bal_row(cid: str, rid: str, k: int) -> int:
        return cat.balance_rows[(cid, rid)][k]

    # -- technologies -------------------------------------------------------
    for t in system.technologies:
        annual_power, annual_energy = annualize_technology(t, cfg)
        r_out = grid.block_hours(t.output_carrier)
        for rid in regions:
            if not tech_is_active(t, rid):
                continue
            existing = t.existing_capacity.get(rid, 0.0)
            if t.potential is None:
                cap_ub = INF
            else:
                cap_ub = max(0.0, t.potential.get(rid, 0.0) - existing)
            j_cap = asm.col(f"cap|{t.id}|{rid}", 0.0, cap_ub, annual_power)
            cat.cap[(t.id, rid)] = j_cap
            if t.offshore:
                cat.offshore_caps.append(j_cap)
                cat.offshore_existing_gw += existing
                pot = INF if t.potential is None else t.potential.get(rid, 0.0)
                cat.offshore_potential_gw += max(pot, existing) if np.isfinite(pot) else INF

            if t.kind == "storage":
                _add_storage(asm, cat, system, grid, t, rid, j_cap, annual_energy, yr, bal_row)
            else:
                _add_dispatch(asm, cat, system, grid, t, rid, j_cap, yr, bal_row)

    # -- transmission lines --------------------------------------------------
    for l in system.lines:
        carrier = system.carrier(l.carrier)
        hydrogen = carrier.kind == "hydrogen"
        intra = system.country_of(l.from_region) == system.country_of(l.to_region)
        cat.line_info[l.id] = LineInfo(
            length_km=l.length_km,
            existing_gw=l.existing_capacity,
            expandable=l.expandable,
            carrier_kind=carrier.kind,
            intra_country=intra,
            from_region=l.from_region,
            to_region=l.to_region,
        )
        if hydrogen and l.expandable:
            notes.append(
                f"line {l.id}: hydrogen pipeline upgrade priced at "
                f"{cfg.h2_pipeline_cost_factor:.0%} of an equivalent electricity line"
            )
        j_x = None
        if l.expandable:
            cost = line_expansion_cost(l.length_km, cfg, hydrogen=hydrogen)
            j_x = asm.col(f"xln|{l.id}", 0.0, INF, cost)
            cat.xline[l.id] = j_x
            cat.fcap_rows[l.id] = []
        K = grid.block_count(l.carrier)
        delta = grid.block_hours(l.carrier)
        for d, (src, dst) in enumerate(((l.from_region, l.to_region),
                                        (l.to_region, l.from_region))):
            start = None
            for k in range(K):
                if l.expandable:
                    j_f = asm.col(f"flw|{l.id}|{d}|{k}", 0.0, INF)
                    ri = asm.row(f"fcp|{l.id}|{d}|{k}", LESS, l.derating * l.existing_capacity)
                    asm.put(ri, j_f, 1.0)
                    asm.put(ri, j_x, -l.derating)
                    cat.fcap_rows[l.id].append(ri)
                else:
                    j_f = asm.col(f"flw|{l.id}|{d}|{k}", 0.0, l.derating * l.existing_capacity)
                start = j_f if start is None else start
                asm.put(bal_row(l.carrier, dst, k), j_f, (1.0 - l.losses) * delta)
                asm.put(bal_row(l.carrier, src, k), j_f, -delta)
            cat.flow[(l.id, d)] = SeriesRef(start, K, delta)

    # -- demands --------------------------------------------------------------
    for di, d in enumerate(system.demands):
        res = grid.block_hours(d.carrier)
        K = grid.block_count(d.carrier)
        try:
            shape = system.profile(d.profile_id)
        except KeyError as exc:
            raise BuildError(f"demand {d.id}: {exc.args[0]}") from None
        series_mwh = expand_to_series(d.annual_energy, shape, grid.horizon_hours)
        block_gwh = series_mwh.reshape(K, res).sum(axis=1) / MWH_PER_GWH
        f = d.flexibility_block_hours
        if f <= res:
            for k in range(K):
                asm.rhs[bal_row(d.carrier, d.region, k)] += block_gwh[k]
            continue
        # flexibility window wider than the balance block: free slices
        q = f // res
        windows = grid.horizon_hours // f
        energy = block_gwh.reshape(windows, q).sum(axis=1)
        peak = system.config.slice_peak_multiple
        start = None
        for w in range(windows):
            slice_ub = peak * energy[w] / q
            ri = asm.row(f"win|{di}|{w}", EQUAL, energy[w])
            for kk in range(q):
                k = w * q + kk
                j_s = asm.col(f"slc|{di}|{k}", 0.0, slice_ub)
                start = j_s if start is None else start
                asm.put(ri, j_s, 1.0)
                asm.put(bal_row(d.carrier, d.region, k), j_s, -1.0)
        cat.slices[di] = SeriesRef(start, windows * q, res)
        cat.window_energy[di] = energy
        cat.window_width[di] = q

    notes.append("transmission losses and storage self-discharge default to 0 (not stated)")
    cat.assumptions = tuple(notes)
    problem = asm.finish()
    cat.row_names = problem.row_names
    cat.objective = problem.obj.copy()
    return problem, cat


def _add_dispatch(asm, cat, system, grid, t, rid, j_cap, yr, bal_row) -> None:
    res = dispatch_resolution(system, t)
    steps = grid.horizon_hours // res
    r_out = grid.block_hours(t.output_carrier)
    existing = t.existing_capacity.get(rid, 0.0)
    try:
        prof = system.availability_profile(t, rid)
    except KeyError as exc:
        raise BuildError(f"technology {t.id}: {exc.args[0]}") from None
    if prof is not None:
        if prof.normalization != "capacity-factor":
            raise BuildError(f"availability profile {prof.id} must be capacity-factor normalized")
        values = prof.as_array()
        if values.size != grid.horizon_hours:
            raise BuildError(
                f"availability profile {prof.id}: length {values.size} != horizon {grid.horizon_hours}"
            )
        avail = values.reshape(steps, res).mean(axis=1)
    else:
        avail = np.ones(steps)
    vom = t.variable_om * MWH_PER_GWH * res * yr

    start = None
    out_per_step = steps // grid.block_count(t.output_carrier)
    in_per_step = 0
    if t.input_carrier is not None:
        in_per_step = steps // grid.block_count(t.input_carrier)
    for s in range(steps):
        a = float(avail[s])
        if a <= 0.0:
            j_d = asm.col(f"dsp|{t.id}|{rid}|{s}", 0.0, 0.0, vom)
        else:
            j_d = asm.col(f"dsp|{t.id}|{rid}|{s}", 0.0, INF, vom)
            ri = asm.row(f"dcp|{t.id}|{rid}|{s}", LESS, a * existing)
            asm.put(ri, j_d, 1.0)
            asm.put(ri, j_cap, -a)
        start = j_d if start is None else start
        asm.put(bal_row(t.output_carrier, rid, s // out_per_step), j_d, float(res))
        if t.input_carrier is not None:
            asm.put(bal_row(t.input_carrier, rid, s // in_per_step), j_d,
                    -res / t.efficiency)
    cat.dispatch[(t.id, rid)] = SeriesRef(start, steps, res)


def _add_storage(asm, cat, system, grid, t, rid, j_cap, annual_energy, yr, bal_row) -> None:
    cid = t.output_carrier
    K = grid.block_count(cid)
    delta = grid.block_hours(cid)
    existing_p = t.existing_capacity.get(rid, 0.0)
    existing_e = t.existing_energy_capacity.get(rid, 0.0)
    eta = math.sqrt(t.efficiency)  # round trip split between charge and discharge
    vom = t.variable_om * MWH_PER_GWH * delta * yr

    j_e = asm.col(f"ecap|{t.id}|{rid}", 0.0, INF, annual_energy)
    cat.ecap[(t.id, rid)] = j_e

    c0 = asm.col(f"chg|{t.id}|{rid}|0")
    for k in range(1, K):
        asm.col(f"chg|{t.id}|{rid}|{k}")
    d0 = asm.col(f"dis|{t.id}|{rid}|0", obj=vom)
    for k in range(1, K):
        asm.col(f"dis|{t.id}|{rid}|{k}", obj=vom)
    l0 = asm.col(f"lvl|{t.id}|{rid}|0")
    for k in range(1, K):
        asm.col(f"lvl|{t.id}|{rid}|{k}")

    def chg_col(k):
        return c0 + k

    def dis_col(k):
        return d0 + k

    def lvl_col(k):
        return l0 + k

    for k in range(K):
        ri = asm.row(f"chc|{t.id}|{rid}|{k}", LESS, existing_p)
        asm.put(ri, chg_col(k), 1.0)
        asm.put(ri, j_cap, -1.0)
        ri = asm.row(f"dsc|{t.id}|{rid}|{k}", LESS, existing_p)
        asm.put(ri, dis_col(k), 1.0)
        asm.put(ri, j_cap, -1.0)
        ri = asm.row(f"lvc|{t.id}|{rid}|{k}", LESS, existing_e)
        asm.put(ri, lvl_col(k), 1.0)
        asm.put(ri, j_e, -1.0)
        # cyclic level recursion: block 0 links back to the last block
        ri = asm.row(f"sto|{t.id}|{rid}|{k}", EQUAL, 0.0)
        asm.put(ri, lvl_col(k), 1.0)
        asm.put(ri, lvl_col((k - 1) % K), -1.0)
        asm.put(ri, chg_col(k), -eta * delta)
        asm.put(ri, dis_col(k), delta / eta)
        bal = bal_row(cid, rid, k)
        asm.put(bal, dis_col(k), delta)
        asm.put(bal, chg_col(k), -delta)

    cat.charge[(t.id, rid)] = SeriesRef(c0, K, delta)
    cat.discharge[(t.id, rid)] = SeriesRef(d0, K, delta)
    cat.level[(t.id, rid)] = SeriesRef(l0, K, delta)


# -- scenario overlays ---------------------------------------------------------

LINE_FAMILY = ("copperplate", "decentral", "grid_cap")
OFFSHORE_FAMILY = ("central", "offshore_fix")


@dataclass(frozen=True)
class Overlay:
    """One constraint overlay; conflicting overlays on a problem are rejected."""

    kind: str
    value: float | None = None
    fixed: tuple[tuple[str, float], ...] = ()


def investment_fixes(
    catalog: VariableCatalog,
    solution: LpSolution,
    regions: set[str] | None = None,
    include_lines: bool = False,
) -> tuple[tuple[str, float], ...]:
    """(column name, value) pairs pinning investments to a solution.

    With a region filter, technology investments are kept when their region
    matches and line expansion when both endpoints match.
    """
    out = []
    for name, j in sorted(catalog.investment_columns(include_lines=include_lines).items()):
        if regions is not None:
            if name.startswith("xln|"):
                info = catalog.line_info[name.split("|", 1)[1]]
                if info.from_region not in regions or info.to_region not in regions:
                    continue
            elif name.rsplit("|", 1)[1] not in regions:
                continue
        out.append((name, float(solution.x[j])))
    return tuple(out)


def apply_scenario_overlay(
    problem: LpProblem, catalog: VariableCatalog, overlay: Overlay
) -> LpProblem:
    """Return a copy of the problem with the overlay's constraints applied."""
    kind = overlay.kind
    applied = set(problem.overlays)
    if kind in applied:
        raise BuildError(f"overlay {kind!r} already applied")
    for fam in (LINE_FAMILY, OFFSHORE_FAMILY):
        if kind in fam and applied & set(fam):
            raise BuildError(f"overlay {kind!r} conflicts with {sorted(applied & set(fam))}")

    out = problem.copy()
    out.overlays = problem.overlays + (kind,)

    if kind == "decentral":
        for j in catalog.xline.values():
            out.ub[j] = 0.0
    elif kind == "copperplate":
        # one internal price zone: expandable intra-country lines lose their
        # capacity limits and their expansion cost
        for lid, info in catalog.line_info.items():
            if not (info.intra_country and info.expandable):
                continue
            for ri in catalog.fcap_rows.get(lid, []):
                out.rhs[ri] = INF
            out.obj[catalog.xline[lid]] = 0.0
    elif kind == "fix_investments":
        if not overlay.fixed:
            raise BuildError("fix_investments overlay needs fixed values")
        index = catalog.investment_columns(include_lines=True)
        for name, value in overlay.fixed:
            if name not in index:
                raise BuildError(f"cannot fix unknown investment column {name!r}")
            j = index[name]
            v = max(0.0, float(value))
            out.lb[j] = v
            out.ub[j] = v
    elif kind in ("central", "offshore_fix"):
        if overlay.value is None:
            raise BuildError(f"{kind} overlay needs a GW target")
        target = float(overlay.value)
        if not catalog.offshore_caps:
            raise BuildError("system has no offshore technologies to constrain")
        new_gw = target - catalog.offshore_existing_gw
        if new_gw < -1e-9:
            raise BuildError(
                f"offshore target {target} GW below existing {catalog.offshore_existing_gw} GW"
            )
        if target > catalog.offshore_potential_gw + 1e-9:
            raise BuildError(
                f"offshore target {target} GW exceeds potential {catalog.offshore_potential_gw} GW"
            )
        out.add_row(
            "ofx", EQUAL, max(new_gw, 0.0), [(j, 1.0) for j in sorted(catalog.offshore_caps)]
        )
    elif kind == "grid_cap":
        if overlay.value is None or overlay.value < 0:
            raise BuildError("grid_cap overlay needs a fraction >= 0")
        base = sum(
            info.existing_gw * info.length_km
            for info in catalog.line_info.values()
            if info.carrier_kind == "electricity"
        )
        entries = [
            (catalog.xline[lid], catalog.line_info[lid].length_km)
            for lid in sorted(catalog.xline)
            if catalog.line_info[lid].carrier_kind == "electricity"
        ]
        out.add_row("gcx", LESS, overlay.value * base, entries)
    else:
        raise BuildError(f"unknown overlay kind {overlay.kind!r}")
    return out
