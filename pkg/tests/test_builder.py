"""LP construction: balances, capacity limits, storage cycling, overlays."""

import math

import numpy as np
import pytest

from enercap.builder import (
    BuildError,
    Overlay,
    apply_demand_variant,
    apply_scenario_overlay,
    build,
    investment_fixes,
)
from enercap.lp import EQUAL, INF
from enercap.pipeline import CAPACITY_FACTOR, SUMS_TO_ONE, Profile
from enercap.solvers import solve
from enercap.system import (
    Carrier,
    DemandSpec,
    EnergySystem,
    Region,
    SystemConfig,
    Technology,
    TransmissionLine,
)

from sysgen import flat_profile, random_system


def single_node_system(horizon=24, vom=10.0, flexibility=1, avail=None, with_storage=False):
    profiles = {"flat": flat_profile("flat", horizon)}
    techs = [
        Technology(id="gen", kind="generation", output_carrier="elec",
                   overnight_cost_power=100.0, fixed_om=1.0, variable_om=vom, lifetime=20,
                   availability_profile_id="av" if avail is not None else None),
    ]
    if avail is not None:
        profiles["av"] = Profile("av", tuple(avail), CAPACITY_FACTOR)
    if with_storage:
        techs.append(Technology(id="store", kind="storage", output_carrier="elec",
                                overnight_cost_power=20.0, overnight_cost_energy=2.0,
                                fixed_om=0.1, lifetime=20, efficiency=1.0))
    # flat 1 GW demand: 8.76 TWh/y scaled by horizon/8760 = 1 GWh per hour
    demand = DemandSpec(carrier="elec", region="R", annual_energy=8.76,
                        profile_id="flat", flexibility_block_hours=flexibility)
    return EnergySystem(
        carriers=(Carrier("elec", "electricity", 1),),
        regions=(Region("R", "country", population=1.0, gdp=1.0),),
        technologies=tuple(techs),
        lines=(),
        demands=(demand,),
        horizon_hours=horizon,
        profiles=profiles,
    )


def test_trivial_instance_builds_one_gw():
    system = single_node_system()
    problem, catalog = build(system)
    balance_rows = [n for n in problem.row_names if n.startswith("bal|")]
    assert len(balance_rows) == 24
    assert not problem.validate()

    sol = solve(problem, backend="builtin")
    assert sol.status == "optimal"
    cap = sol.x[catalog.cap[("gen", "R")]]
    assert cap == pytest.approx(1.0, abs=1e-7)
    # objective: annualized capacity cost + year-scaled variable O&M
    af = 0.02 / (1 - 1.02 ** -20)
    expected = (100.0 * af + 1.0) * 1e6 * 1.0 + 10.0 * 1000.0 * 24 * (8760 / 24)
    assert sol.objective == pytest.approx(expected, rel=1e-9)


def test_flexible_demand_replaces_storage():
    # availability zero half the time; hand-enumerated candidates:
    # flexible demand -> 2 GW generator, no storage
    # inflexible demand -> generator + storage must bridge the dark hours
    avail = [1.0, 0.0] * 12
    flexible = single_node_system(flexibility=24, avail=avail, with_storage=True)
    problem, catalog = build(flexible)
    sol = solve(problem, backend="builtin")
    assert sol.status == "optimal"
    assert sol.x[catalog.cap[("gen", "R")]] == pytest.approx(2.0, abs=1e-6)
    assert sol.x[catalog.cap[("store", "R")]] == pytest.approx(0.0, abs=1e-6)

    inflexible = single_node_system(flexibility=1, avail=avail, with_storage=True)
    problem2, catalog2 = build(inflexible)
    sol2 = solve(problem2, backend="builtin")
    assert sol2.status == "optimal"
    assert sol2.x[catalog2.cap[("store", "R")]] == pytest.approx(1.0, abs=1e-6)
    assert sol2.objective > sol.objective


def test_storage_cycle_is_closed():
    system = single_node_system(with_storage=True)
    problem, catalog = build(system)
    # the block-0 recursion row references the last block's level
    lvl = catalog.level[("store", "R")]
    row0 = problem.row_names.index("sto|store|R|0")
    cols = problem.col_idx[problem.row_idx == row0]
    assert lvl.col(0) in cols
    assert lvl.col(lvl.count - 1) in cols


def test_unservable_demand_rejected():
    system = single_node_system()
    bad = EnergySystem(
        carriers=system.carriers + (Carrier("h2", "hydrogen", 24),),
        regions=system.regions,
        technologies=system.technologies,
        lines=(),
        demands=system.demands + (DemandSpec("h2", "R", 1.0, "flat", 24),),
        horizon_hours=24,
        profiles=system.profiles,
    )
    with pytest.raises(BuildError, match="pathway"):
        build(bad)


def test_sparsity_grows_linearly():
    rng = np.random.default_rng(0)
    small = random_system(rng, horizon=24, n_regions=3)
    rng = np.random.default_rng(0)
    big = random_system(rng, horizon=96, n_regions=3)
    p_small, _ = build(small)
    p_big, _ = build(big)
    assert p_big.nnz <= 4.4 * p_small.nnz  # 4x the timesteps, linear growth


def test_eff_variant_scales_demand():
    system = single_node_system()
    eff = apply_demand_variant(system, "EFF")
    factor = system.config.eff_demand_factor
    assert eff.demands[0].annual_energy == pytest.approx(8.76 * factor)
    assert apply_demand_variant(system, "REF") is system


def two_region_line_system(expandable=True, existing=0.5):
    horizon = 24
    profiles = {"flat": flat_profile("flat", horizon)}
    return EnergySystem(
        carriers=(Carrier("elec", "electricity", 1),),
        regions=(
            Region("A", "subregion", parent="C", population=1.0, gdp=1.0),
            Region("B", "subregion", parent="C", population=1.0, gdp=1.0),
            Region("C", "country"),
        ),
        technologies=(
            Technology(id="cheap", kind="generation", output_carrier="elec",
                       overnight_cost_power=50.0, variable_om=5.0, lifetime=20,
                       potential={"A": 10.0}),
            Technology(id="dear", kind="generation", output_carrier="elec",
                       overnight_cost_power=400.0, variable_om=50.0, lifetime=20),
        ),
        lines=(TransmissionLine("AB", "elec", "A", "B", length_km=100.0,
                                existing_capacity=existing, derating=0.7,
                                expandable=expandable),),
        demands=(DemandSpec("elec", "B", 8.76, "flat", 1),),
        horizon_hours=horizon,
        profiles=profiles,
    )


def test_flow_capacity_uses_derating_and_expansion():
    system = two_region_line_system()
    problem, catalog = build(system)
    sol = solve(problem, backend="builtin")
    assert sol.status == "optimal"
    # all demand served from A: flow = 1 GW, so derated existing + expansion covers it
    x = sol.x[catalog.xline["AB"]]
    assert 0.7 * (0.5 + x) >= 1.0 - 1e-6
    flow0 = catalog.flow[("AB", 0)]
    assert sol.x[flow0.col(0)] == pytest.approx(1.0, abs=1e-6)


def test_decentral_overlay_blocks_expansion():
    system = two_region_line_system()
    problem, catalog = build(system)
    overlaid = apply_scenario_overlay(problem, catalog, Overlay(kind="decentral"))
    assert overlaid.ub[catalog.xline["AB"]] == 0.0
    assert problem.ub[catalog.xline["AB"]] == INF  # original untouched
    sol = solve(overlaid, backend="builtin")
    # 0.35 GW import limit: the rest comes from the expensive local generator
    assert sol.status == "optimal"
    assert sol.x[catalog.cap[("dear", "B")]] == pytest.approx(1.0 - 0.35, abs=1e-6)


def test_copperplate_overlay_relaxes_intra_country_lines():
    system = two_region_line_system()
    problem, catalog = build(system)
    copper = apply_scenario_overlay(problem, catalog, Overlay(kind="copperplate"))
    assert copper.obj[catalog.xline["AB"]] == 0.0
    for ri in catalog.fcap_rows["AB"]:
        assert copper.rhs[ri] == INF
    sol = solve(copper, backend="builtin")
    assert sol.status == "optimal"
    # with free transport, only the cheap generator is built
    assert sol.x[catalog.cap[("dear", "B")]] == pytest.approx(0.0, abs=1e-6)


def test_fix_investments_overlay_round_trip():
    system = two_region_line_system()
    problem, catalog = build(system)
    sol = solve(problem, backend="builtin")
    fixes = investment_fixes(catalog, sol)
    fixed = apply_scenario_overlay(problem, catalog,
                                   Overlay(kind="fix_investments", fixed=fixes))
    sol2 = solve(fixed, backend="builtin")
    assert sol2.status == "optimal"
    assert sol2.objective == pytest.approx(sol.objective, rel=1e-7)
    for name, value in fixes:
        j = catalog.investment_columns()[name]
        assert sol2.x[j] == pytest.approx(value, abs=1e-9)


def test_conflicting_overlays_rejected():
    system = two_region_line_system()
    problem, catalog = build(system)
    p = apply_scenario_overlay(problem, catalog, Overlay(kind="decentral"))
    with pytest.raises(BuildError, match="conflict"):
        apply_scenario_overlay(p, catalog, Overlay(kind="copperplate"))
    with pytest.raises(BuildError, match="already applied"):
        apply_scenario_overlay(p, catalog, Overlay(kind="decentral"))


def test_offshore_overlays():
    horizon = 24
    profiles = {
        "flat": flat_profile("flat", horizon),
        "off": Profile("off", tuple([0.6] * horizon), CAPACITY_FACTOR),
    }
    system = EnergySystem(
        carriers=(Carrier("elec", "electricity", 1),),
        regions=(Region("R", "country", population=1.0, gdp=1.0),),
        technologies=(
            Technology(id="offshore", kind="generation", output_carrier="elec",
                       overnight_cost_power=2335.0, fixed_om=46.7, lifetime=30,
                       availability_profile_id="off", potential={"R": 8.0}, offshore=True),
            Technology(id="backstop", kind="generation", output_carrier="elec",
                       overnight_cost_power=150.0, variable_om=80.0, lifetime=30),
        ),
        lines=(),
        demands=(DemandSpec("elec", "R", 8.76, "flat", 1),),
        horizon_hours=horizon,
        profiles=profiles,
    )
    problem, catalog = build(system)
    fixed = apply_scenario_overlay(problem, catalog, Overlay(kind="offshore_fix", value=5.0))
    sol = solve(fixed, backend="builtin")
    assert sol.status == "optimal"
    total_offshore = sum(sol.x[j] for j in catalog.offshore_caps)
    assert total_offshore == pytest.approx(5.0, abs=1e-7)
    with pytest.raises(BuildError, match="potential"):
        apply_scenario_overlay(problem, catalog, Overlay(kind="central", value=9.0))


def test_grid_cap_overlay_bounds_twkm():
    system = two_region_line_system()
    problem, catalog = build(system)
    capped = apply_scenario_overlay(problem, catalog, Overlay(kind="grid_cap", value=1.0))
    # cap = 1.0 x existing(0.5 GW) x 100 km
    i = capped.row_names.index("gcx")
    assert capped.rhs[i] == pytest.approx(0.5 * 100.0)
    sol = solve(capped, backend="builtin")
    assert sol.status == "optimal"
    assert sol.x[catalog.xline["AB"]] * 100.0 <= 50.0 + 1e-6


def test_monotone_feasibility_in_grid_cap():
    system = two_region_line_system()
    problem, catalog = build(system)
    objectives = []
    for frac in (0.0, 0.5, 1.0, 2.0):
        capped = apply_scenario_overlay(problem, catalog, Overlay(kind="grid_cap", value=frac))
        sol = solve(capped, backend="builtin")
        assert sol.status == "optimal"
        objectives.append(sol.objective)
    assert all(a >= b - 1e-6 for a, b in zip(objectives, objectives[1:]))


def test_balance_residuals_on_random_systems():
    rng = np.random.default_rng(42)
    for _ in range(3):
        system = random_system(rng, horizon=24)
        problem, catalog = build(system)
        sol = solve(problem, backend="builtin")
        assert sol.status == "optimal"
        A = problem.matrix()
        ax = A @ sol.x
        for i, name in enumerate(problem.row_names):
            if name.startswith("bal|"):
                assert abs(ax[i] - problem.rhs[i]) <= 1e-6, name
            if name.startswith("sto|"):
                assert abs(ax[i] - problem.rhs[i]) <= 1e-6, name
