"""Domain type validation and offshore wake blocks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enercap.system import (
    Carrier,
    DemandSpec,
    EnergySystem,
    Region,
    Technology,
    TransmissionLine,
    offshore_blocks,
    validate,
)

from sysgen import flat_profile


def toy_system(**overrides):
    fields = dict(
        carriers=(Carrier("elec", "electricity", 1),),
        regions=(
            Region("A", "country", population=10.0, gdp=5.0),
            Region("B", "country", population=5.0, gdp=10.0),
        ),
        technologies=(
            Technology(id="gen", kind="generation", output_carrier="elec",
                       overnight_cost_power=100.0, lifetime=20),
        ),
        lines=(TransmissionLine("AB", "elec", "A", "B", 100.0, 1.0, 0.7, True),),
        demands=(DemandSpec("elec", "B", 10.0, "flat", 1),),
        horizon_hours=24,
        profiles={"flat": flat_profile("flat", 24)},
    )
    fields.update(overrides)
    return EnergySystem(**fields)


def test_well_formed_system_is_clean():
    assert validate(toy_system()) == []


def test_self_loop_line():
    bad = toy_system(lines=(TransmissionLine("AA", "elec", "A", "A", 10.0),))
    violations = validate(bad)
    assert len(violations) == 1
    assert "AA" in violations[0].entity
    assert "self-loop" in violations[0].rule


def test_efficiency_bound():
    bad = toy_system(technologies=(
        Technology(id="gen", kind="generation", output_carrier="elec", lifetime=20),
        Technology(id="conv", kind="conversion", output_carrier="elec",
                   input_carrier="elec", efficiency=1.2, lifetime=20),
    ))
    violations = validate(bad)
    assert any("efficiency" in v.rule and "conv" in v.entity for v in violations)


def test_subregion_parent_rules():
    bad = toy_system(regions=(
        Region("A", "country", population=1.0, gdp=1.0),
        Region("B", "subregion", population=1.0, gdp=1.0),   # parent missing
        Region("C", "subregion", parent="B", population=1.0, gdp=1.0),
    ))
    rules = {v.rule for v in validate(bad)}
    assert any("parent" in r for r in rules)


def test_resolution_must_divide_horizon():
    bad = toy_system(carriers=(Carrier("elec", "electricity", 5),))
    assert any("divide the horizon" in v.rule for v in validate(bad))


def test_validate_is_pure():
    system = toy_system()
    first = validate(system)
    second = validate(system)
    assert first == second == []


def test_missing_supply_path_detected():
    bad = toy_system(technologies=(
        Technology(id="gen", kind="generation", output_carrier="elec",
                   potential={"A": 0.0}, lifetime=20),
    ))
    violations = validate(bad)
    assert any("pathway" in v.rule for v in violations)


def test_non_storage_energy_cost_rejected():
    bad = toy_system(technologies=(
        Technology(id="gen", kind="generation", output_carrier="elec",
                   overnight_cost_energy=5.0, lifetime=20),
    ))
    assert any("storage only" in v.rule for v in validate(bad))


def test_offshore_blocks_paper_case():
    assert offshore_blocks(80.0, 50.0, 0.85) == [(50.0, 1.0), (30.0, 0.85)]
    assert offshore_blocks(40.0, 50.0, 0.85) == [(40.0, 1.0)]
    assert offshore_blocks(50.0, 50.0, 0.85) == [(50.0, 1.0)]


def test_offshore_blocks_rejects_bad_inputs():
    with pytest.raises(ValueError):
        offshore_blocks(-1.0, 50.0, 0.85)
    with pytest.raises(ValueError):
        offshore_blocks(10.0, -2.0, 0.85)
    with pytest.raises(ValueError):
        offshore_blocks(10.0, 5.0, 0.0)
    with pytest.raises(ValueError):
        offshore_blocks(10.0, 5.0, 1.5)


@settings(max_examples=300)
@given(
    potential=st.floats(0.0, 500.0, allow_nan=False),
    threshold=st.floats(0.0, 200.0, allow_nan=False),
    factor=st.floats(0.05, 1.0, allow_nan=False),
)
def test_offshore_blocks_conserve_capacity(potential, threshold, factor):
    blocks = offshore_blocks(potential, threshold, factor)
    assert sum(c for c, _ in blocks) == pytest.approx(potential, abs=1e-9)
    assert len(blocks) <= 2
    assert all(c > 0 for c, _ in blocks)
    scales = [s for _, s in blocks]
    assert scales == sorted(scales, reverse=True)


def test_empty_potential_means_unbounded():
    t = Technology(id="g", kind="generation", output_carrier="e", potential={})
    assert t.potential is None
