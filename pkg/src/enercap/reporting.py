"""Turn LP solutions into scenario reports and plot-ready data files.

A ScenarioResult aggregates installed capacities, network expansion (per
line and as TW·km), an annualized cost breakdown whose categories sum to
the LP objective, and per-region net exchange.  Emission is deterministic:
stable column order, stable row sort, numbers at six significant digits, so
re-emitting a result is byte-identical.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .builder import VariableCatalog
from .lp import LpProblem, LpSolution, OPTIMAL
from .system import EnergySystem

COST_CATEGORIES = ("investment_battery", "investment_generation",
                   "operational", "investment_transmission")

GWH_PER_TWH = 1000.0


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    status: str
    objective: float  # EUR/y
    capacities: dict[tuple[str, str], float]       # (tech, region) -> installed GW
    new_capacities: dict[tuple[str, str], float]   # (tech, region) -> newly built GW
    storage_energy: dict[tuple[str, str], float]   # (tech, region) -> new GWh
    expansion_gw: dict[str, float]                 # line -> GW added
    expansion_twkm: float
    costs: dict[str, float]                        # category -> bn EUR/y
    net_exchange: dict[str, float]                 # region -> TWh/y (imports - exports)
    net_exchange_by_carrier: dict[tuple[str, str], float]
    assumptions: tuple[str, ...] = ()
    axis_value: float | None = None
    dispatch: dict[tuple[str, str], tuple[float, ...]] | None = None
    dispatch_step_hours: dict[tuple[str, str], int] = field(default_factory=dict)

    def capacity_by_tech(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for (tid, _), gw in self.capacities.items():
            out[tid] = out.get(tid, 0.0) + gw
        return out

    def total_cost_bn(self) -> float:
        return sum(self.costs.values())


class ReportError(ValueError):
    pass


def summarize(
    solution: LpSolution,
    catalog: VariableCatalog,
    system: EnergySystem,
    name: str = "scenario",
    axis_value: float | None = None,
    collect_dispatch: bool = False,
) -> ScenarioResult:
    """Aggregate an optimal solution into the reported quantities."""
    if solution.status != OPTIMAL:
        raise ReportError(f"cannot summarize a {solution.status} solution")
    x = solution.x
    obj = catalog.objective

    capacities: dict[tuple[str, str], float] = {}
    new_caps: dict[tuple[str, str], float] = {}
    storage_kinds = {t.id for t in system.technologies if t.kind == "storage"}
    cost_battery = 0.0
    cost_generation = 0.0
    for (tid, rid), j in catalog.cap.items():
        new = float(x[j])
        existing = system.technology(tid).existing_capacity.get(rid, 0.0)
        new_caps[(tid, rid)] = new
        capacities[(tid, rid)] = existing + new
        if tid in storage_kinds:
            cost_battery += obj[j] * new
        else:
            cost_generation += obj[j] * new

    storage_energy: dict[tuple[str, str], float] = {}
    for (tid, rid), j in catalog.ecap.items():
        storage_energy[(tid, rid)] = float(x[j])
        cost_battery += obj[j] * float(x[j])

    expansion_gw: dict[str, float] = {}
    cost_transmission = 0.0
    twkm = 0.0
    for lid, info in catalog.line_info.items():
        j = catalog.xline.get(lid)
        added = float(x[j]) if j is not None else 0.0
        expansion_gw[lid] = added
        twkm += added * info.length_km / 1000.0
        if j is not None:
            cost_transmission += obj[j] * added

    cost_operational = 0.0
    for ref in list(catalog.dispatch.values()) + list(catalog.discharge.values()):
        cols = np.arange(ref.start, ref.start + ref.count)
        cost_operational += float(obj[cols] @ x[cols])

    exchange: dict[tuple[str, str], float] = {}
    for (lid, d), ref in catalog.flow.items():
        line = system.line(lid)
        src, dst = (line.from_region, line.to_region) if d == 0 else (line.to_region, line.from_region)
        cols = np.arange(ref.start, ref.start + ref.count)
        gwh = float(x[cols].sum()) * ref.step_hours
        key_src = (src, line.carrier)
        key_dst = (dst, line.carrier)
        exchange[key_src] = exchange.get(key_src, 0.0) - gwh
        exchange[key_dst] = exchange.get(key_dst, 0.0) + gwh * (1.0 - line.losses)
    to_twh = catalog.year_scale / GWH_PER_TWH
    exchange = {k: v * to_twh for k, v in exchange.items()}
    net_exchange: dict[str, float] = {}
    for r in system.regions:
        net_exchange[r.id] = sum(v for (rid, _), v in exchange.items() if rid == r.id)

    costs = {
        "investment_battery": cost_battery / 1e9,
        "investment_generation": cost_generation / 1e9,
        "operational": cost_operational / 1e9,
        "investment_transmission": cost_transmission / 1e9,
    }

    dispatch = None
    step_hours: dict[tuple[str, str], int] = {}
    if collect_dispatch:
        dispatch = {}
        for key, ref in catalog.dispatch.items():
            cols = np.arange(ref.start, ref.start + ref.count)
            dispatch[key] = tuple(float(v) for v in x[cols])
            step_hours[key] = ref.step_hours

    return ScenarioResult(
        name=name,
        status=solution.status,
        objective=solution.objective,
        capacities=capacities,
        new_capacities=new_caps,
        storage_energy=storage_energy,
        expansion_gw=expansion_gw,
        expansion_twkm=twkm,
        costs=costs,
        net_exchange=net_exchange,
        net_exchange_by_carrier=exchange,
        assumptions=catalog.assumptions,
        axis_value=axis_value,
        dispatch=dispatch,
        dispatch_step_hours=step_hours,
    )


def _num(x: float) -> str:
    """Fixed-precision decimal at six significant digits."""
    if x == 0.0 or abs(x) < 5e-13:
        return "0"
    return f"{x:.6g}"


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _table(header: list[str], rows: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(row) + "\n")
        return buf.getvalue()
    if fmt == "jsonl":
        buf = io.StringIO()
        for row in rows:
            buf.write(json.dumps(dict(zip(header, row)), sort_keys=True) + "\n")
        return buf.getvalue()
    raise ReportError(f"unknown format {fmt!r}")


def emit(
    result: ScenarioResult,
    out_dir: str | Path,
    fmt: str = "csv",
    dispatch_week: int | None = None,
) -> list[Path]:
    """Write one file per table; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create output directory {out}: {exc}") from exc
    ext = "csv" if fmt == "csv" else "jsonl"
    written: list[Path] = []

    def table(name: str, header: list[str], rows: list[list[str]]) -> None:
        path = out / f"{name}.{ext}"
        try:
            _write(path, _table(header, rows, fmt))
        except OSError as exc:
            raise ReportError(f"cannot write {path}: {exc}") from exc
        written.append(path)

    rows = [
        [rid, tid, _num(result.capacities[(tid, rid)] - result.new_capacities[(tid, rid)]),
         _num(result.new_capacities[(tid, rid)]), _num(result.capacities[(tid, rid)]),
         _num(result.storage_energy.get((tid, rid), 0.0))]
        for (tid, rid) in sorted(result.capacities, key=lambda k: (k[1], k[0]))
    ]
    table("capacities", ["region", "technology", "existing_gw", "new_gw", "total_gw",
                         "new_storage_gwh"], rows)

    rows = [[cat, _num(result.costs[cat])] for cat in COST_CATEGORIES]
    rows.append(["total", _num(sum(result.costs.values()))])
    table("costs", ["category", "bn_eur_per_year"], rows)

    rows = [[rid, carrier, _num(v)]
            for (rid, carrier), v in sorted(result.net_exchange_by_carrier.items())]
    rows += [[rid, "all", _num(result.net_exchange[rid])] for rid in sorted(result.net_exchange)]
    table("exchange", ["region", "carrier", "net_import_twh_per_year"], rows)

    rows = [[lid, _num(result.expansion_gw[lid])] for lid in sorted(result.expansion_gw)]
    rows.append(["total_twkm", _num(result.expansion_twkm)])
    table("expansion", ["line", "expansion_gw"], rows)

    if result.assumptions:
        table("assumptions", ["note"], [[n] for n in result.assumptions])

    if dispatch_week is not None and result.dispatch:
        rows = []
        lo, hi = dispatch_week * 168, (dispatch_week + 1) * 168
        for (tid, rid) in sorted(result.dispatch):
            step = result.dispatch_step_hours[(tid, rid)]
            for s, gw in enumerate(result.dispatch[(tid, rid)]):
                t0 = s * step
                if lo <= t0 < hi:
                    rows.append([str(t0), tid, rid, str(step), _num(gw)])
        table("dispatch", ["t0_hour", "technology", "region", "step_hours", "dispatch_gw"], rows)
    return written


def emit_sweep(
    results: list[ScenarioResult],
    out_dir: str | Path,
    fmt: str = "csv",
) -> list[Path]:
    """Per-level subdirectories plus the combined substitution-curve table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    techs = sorted({tid for r in results for tid in r.capacity_by_tech()})
    header = ["axis_value", "total_cost_bn", "expansion_twkm"] + [f"{t}_gw" for t in techs]
    rows = []
    for r in results:
        sub = out / f"level_{r.axis_value:g}"
        written += emit(r, sub, fmt)
        by_tech = r.capacity_by_tech()
        rows.append([_num(r.axis_value), _num(r.total_cost_bn()), _num(r.expansion_twkm)]
                    + [_num(by_tech.get(t, 0.0)) for t in techs])
    ext = "csv" if fmt == "csv" else "jsonl"
    path = out / f"substitution_curve.{ext}"
    _write(path, _table(header, rows, fmt))
    written.append(path)
    return written
