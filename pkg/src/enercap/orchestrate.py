"""Scenario execution: named overlays, the two-phase grid-planning
comparison, the two-stage continental/regional solve, and sensitivity sweeps.

The disintegrated scenario mirrors grid-development practice: phase A sites
generation and storage in a single internal price zone (expandable
intra-country lines unbounded, expansion cost ignored), phase B freezes
those investments and pays for the grid the siting actually requires.  Its
total cost therefore bounds the jointly optimized integrated scenario from
above.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import timegrid as tg
from .builder import (
    EFF,
    REF,
    Overlay,
    VariableCatalog,
    apply_demand_variant,
    apply_scenario_overlay,
    build,
    investment_fixes,
)
from .lp import OPTIMAL, LpProblem, LpSolution
from .reporting import ScenarioResult, summarize
from .solvers import SolveOptions, solve
from .system import EnergySystem

SCENARIO_KINDS = ("integrated", "disintegrated", "central", "decentral",
                  "grid_cap", "offshore_fix")
STAGES = ("continental", "regional")

#: Replication sweep grids; desk instances scale the offshore levels.
DEFAULT_GRID_CAP_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_OFFSHORE_LEVELS = (10.0, 20.0, 30.0, 40.0, 50.0)


class ScenarioError(RuntimeError):
    def __init__(self, message: str, status: str = ""):
        super().__init__(message)
        self.status = status


class SweepAborted(RuntimeError):
    """A sweep level failed; completed levels are preserved on .results."""

    def __init__(self, message: str, results: list[ScenarioResult], level: float):
        super().__init__(message)
        self.results = results
        self.level = level


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    kind: str = "integrated"
    value: float | None = None       # GW for central/offshore_fix, fraction for grid_cap
    demand_variant: str = REF
    stage: str = "regional"

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.demand_variant not in (REF, EFF):
            raise ValueError(f"unknown demand variant {self.demand_variant!r}")
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.kind in ("central", "offshore_fix"):
            if self.value is None or self.value < 0:
                raise ValueError(f"{self.kind} scenario needs a GW target >= 0")
        if self.kind == "grid_cap":
            if self.value is None or self.value < 0:
                raise ValueError("grid_cap scenario needs a fraction >= 0")


@dataclass(frozen=True)
class TwoStageResult:
    continental: ScenarioResult
    regional: ScenarioResult
    fixed_investments: tuple[tuple[str, float], ...]
    reconciliation: dict[str, tuple[float, float]] = field(default_factory=dict)


def _solve_or_raise(problem: LpProblem, backend, options, label: str) -> LpSolution:
    sol = solve(problem, options=options, backend=backend)
    if sol.status != OPTIMAL:
        raise ScenarioError(f"{label}: solver returned {sol.status}", status=sol.status)
    return sol


def run_scenario(
    system: EnergySystem,
    scenario: ScenarioConfig,
    backend: str | None = None,
    options: SolveOptions | None = None,
    collect_dispatch: bool = False,
) -> ScenarioResult:
    """Build, overlay, solve and summarize one scenario."""
    sysv = apply_demand_variant(system, scenario.demand_variant)
    problem, catalog = build(sysv)

    if scenario.kind == "disintegrated":
        solution = _solve_disintegrated(problem, catalog, backend, options)[0]
    else:
        if scenario.kind != "integrated":
            problem = apply_scenario_overlay(
                problem, catalog, Overlay(kind=scenario.kind, value=scenario.value)
            )
        solution = _solve_or_raise(problem, backend, options, scenario.name)
    return summarize(
        solution,
        catalog,
        sysv,
        name=scenario.name,
        axis_value=scenario.value,
        collect_dispatch=collect_dispatch,
    )


def _solve_disintegrated(
    problem: LpProblem,
    catalog: VariableCatalog,
    backend,
    options,
) -> tuple[LpSolution, LpSolution]:
    copper = apply_scenario_overlay(problem, catalog, Overlay(kind="copperplate"))
    phase_a = _solve_or_raise(copper, backend, options, "disintegrated phase A")
    fixes = investment_fixes(catalog, phase_a)
    fixed = apply_scenario_overlay(
        problem, catalog, Overlay(kind="fix_investments", fixed=fixes)
    )
    phase_b = _solve_or_raise(fixed, backend, options, "disintegrated phase B")
    return phase_b, phase_a


def run_two_stage(
    system_continental: EnergySystem,
    system_regional: EnergySystem,
    scenario: ScenarioConfig,
    backend: str | None = None,
    options: SolveOptions | None = None,
) -> TwoStageResult:
    """Continental greenfield first, then the regional re-solve.

    Stage 2 pins every non-focus investment (capacity, storage energy, and
    expansion of lines between non-focus nodes) to its stage-1 optimum with
    equality bounds; focus-country investments and all dispatch re-optimize.
    """
    foreign, focus = _two_stage_partition(system_continental, system_regional)

    stage1_scenario = scenario if scenario.stage == "continental" else ScenarioConfig(
        name=f"{scenario.name}/continental",
        kind="integrated",
        demand_variant=scenario.demand_variant,
        stage="continental",
    )
    sys1 = apply_demand_variant(system_continental, scenario.demand_variant)
    problem1, catalog1 = build(sys1)
    if stage1_scenario.kind == "disintegrated":
        sol1 = _solve_disintegrated(problem1, catalog1, backend, options)[0]
    elif stage1_scenario.kind != "integrated":
        p = apply_scenario_overlay(problem1, catalog1,
                                   Overlay(kind=stage1_scenario.kind, value=stage1_scenario.value))
        sol1 = _solve_or_raise(p, backend, options, "stage 1")
    else:
        sol1 = _solve_or_raise(problem1, backend, options, "stage 1")
    result1 = summarize(sol1, catalog1, sys1, name=f"{scenario.name}/continental")

    fixes = investment_fixes(catalog1, sol1, regions=foreign, include_lines=True)

    sys2 = apply_demand_variant(system_regional, scenario.demand_variant)
    problem2, catalog2 = build(sys2)
    try:
        problem2 = apply_scenario_overlay(
            problem2, catalog2, Overlay(kind="fix_investments", fixed=fixes)
        )
    except Exception as exc:
        raise ScenarioError(f"stage 2 cannot honour stage-1 investments: {exc}") from exc
    if scenario.stage == "regional" and scenario.kind not in ("integrated", "disintegrated"):
        problem2 = apply_scenario_overlay(
            problem2, catalog2, Overlay(kind=scenario.kind, value=scenario.value)
        )
    try:
        sol2 = _solve_or_raise(problem2, backend, options, "stage 2")
    except ScenarioError as exc:
        raise ScenarioError(
            f"stage 2 infeasible under fixed non-focus investments "
            f"({len(fixes)} bounds): {exc}", status=exc.status
        ) from exc
    result2 = summarize(sol2, catalog2, sys2, name=f"{scenario.name}/regional")

    reconciliation: dict[str, tuple[float, float]] = {}
    sub_of_focus = {r.id for r in system_regional.regions
                    if r.level == "subregion" and r.parent in focus}
    for tid in sorted({t.id for t in system_continental.technologies}):
        s1 = sum(gw for (t_, rid), gw in result1.capacities.items()
                 if t_ == tid and rid in focus)
        s2 = sum(gw for (t_, rid), gw in result2.capacities.items()
                 if t_ == tid and rid in sub_of_focus)
        reconciliation[tid] = (s1, s2)

    return TwoStageResult(
        continental=result1,
        regional=result2,
        fixed_investments=fixes,
        reconciliation=reconciliation,
    )


def _two_stage_partition(cont: EnergySystem, reg: EnergySystem) -> tuple[set[str], set[str]]:
    """(foreign region ids, focus country ids) implied by the two systems."""
    cont_ids = {r.id for r in cont.regions}
    reg_ids = {r.id for r in reg.regions}
    focus = {r.parent for r in reg.regions if r.level == "subregion" and r.parent in cont_ids}
    if not focus:
        raise ScenarioError("regional system has no subregions of a continental country")
    foreign = (cont_ids & reg_ids) - focus
    missing = cont_ids - reg_ids - focus
    if missing:
        raise ScenarioError(f"continental regions missing from the regional system: {sorted(missing)}")
    return foreign, focus


def sweep(
    system: EnergySystem,
    axis: str,
    levels: list[float] | tuple[float, ...],
    demand_variant: str = REF,
    backend: str | None = None,
    options: SolveOptions | None = None,
    workers: int = 1,
) -> list[ScenarioResult]:
    """One scenario per level along a sensitivity axis, in ascending order."""
    if axis not in ("grid_cap", "offshore"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    levels = [float(v) for v in levels]
    if not levels:
        raise ValueError("sweep needs at least one level")
    if sorted(levels) != levels:
        raise ValueError("sweep levels must be sorted ascending")
    kind = "grid_cap" if axis == "grid_cap" else "offshore_fix"
    configs = [
        ScenarioConfig(name=f"{axis}_{v:g}", kind=kind, value=v, demand_variant=demand_variant)
        for v in levels
    ]

    results: list[ScenarioResult] = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_scenario, system, cfg, backend, options)
                       for cfg in configs]
            for cfg, fut in zip(configs, futures):
                try:
                    results.append(fut.result())
                except Exception as exc:
                    raise SweepAborted(
                        f"sweep level {cfg.value:g} failed: {exc}", results, cfg.value
                    ) from exc
        return results
    for cfg in configs:
        try:
            results.append(run_scenario(system, cfg, backend=backend, options=options))
        except Exception as exc:
            raise SweepAborted(
                f"sweep level {cfg.value:g} failed: {exc}", results, cfg.value
            ) from exc
    return results
