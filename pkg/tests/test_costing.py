"""Annualization oracles: closed-form annuity checked against the payment sum."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enercap.costing import (
    CostingConfig,
    annuity_factor,
    annualize_technology,
    line_expansion_cost,
)
from enercap.system import Technology


def annuity_by_summation(rate: float, n: int) -> float:
    # independent oracle: payment a with sum_k a/(1+r)^k = 1
    return 1.0 / sum((1.0 + rate) ** (-k) for k in range(1, n + 1))


def test_annuity_reference_values():
    assert annuity_factor(0.02, 25) == pytest.approx(0.051220, abs=1e-6)
    assert annuity_factor(0.02, 60) == pytest.approx(0.028768, abs=1e-6)
    assert annuity_factor(0.0, 10) == pytest.approx(0.1, abs=1e-12)


@settings(max_examples=200)
@given(rate=st.floats(0.0, 0.2), n=st.integers(1, 80))
def test_annuity_matches_summation_oracle(rate, n):
    assert annuity_factor(rate, n) == pytest.approx(annuity_by_summation(rate, n), rel=1e-10)


@settings(max_examples=200)
@given(rate=st.floats(0.001, 0.2), n=st.integers(1, 80))
def test_annuity_monotonicity(rate, n):
    f = annuity_factor(rate, n)
    assert annuity_factor(rate + 0.01, n) > f
    if n > 1:
        assert annuity_factor(rate, n - 1) > f
    assert f * n >= 1.0


def test_annuity_guards():
    with pytest.raises(ValueError):
        annuity_factor(0.02, 0.5)
    with pytest.raises(ValueError):
        annuity_factor(-0.01, 10)


def test_pv_open_space_annualization():
    pv = Technology(id="pv_open", kind="generation", output_carrier="elec",
                    overnight_cost_power=317.0, fixed_om=6.34, lifetime=25)
    power, energy = annualize_technology(pv, CostingConfig())
    # 317 EUR/kW * af(2%, 25y) + 6.34 EUR/kW/y, in EUR/GW/y
    assert power == pytest.approx(22.57e6, rel=1e-3)
    assert energy == 0.0


def test_hydrogen_turbine_annualization():
    ht = Technology(id="h2t", kind="conversion", output_carrier="elec",
                    input_carrier="h2", overnight_cost_power=185.0, fixed_om=3.3,
                    lifetime=30, efficiency=0.4)
    power, _ = annualize_technology(ht, CostingConfig())
    assert power == pytest.approx(11.56e6, rel=1e-3)


def test_zero_overnight_cost_is_om_only():
    t = Technology(id="x", kind="generation", output_carrier="elec",
                   overnight_cost_power=0.0, fixed_om=7.0, lifetime=10)
    power, _ = annualize_technology(t, CostingConfig())
    assert power == pytest.approx(7.0e6)


@settings(max_examples=100)
@given(cost=st.floats(0.0, 5000.0), scale=st.floats(0.1, 10.0))
def test_annualization_linear_in_overnight_cost(cost, scale):
    base = Technology(id="a", kind="generation", output_carrier="e",
                      overnight_cost_power=cost, lifetime=20)
    scaled = Technology(id="b", kind="generation", output_carrier="e",
                        overnight_cost_power=cost * scale, lifetime=20)
    cfg = CostingConfig()
    assert annualize_technology(scaled, cfg)[0] == pytest.approx(
        annualize_technology(base, cfg)[0] * scale, rel=1e-12, abs=1e-9)


def test_grid_unit_cost_derivation():
    # 480,000 EUR/km for a line rated at 175 MW
    derived = 480_000.0 / 0.175
    assert derived == pytest.approx(2.7428e6, rel=1e-3)
    assert float(f"{derived:.3g}") == 2.74e6


def test_line_cost_100km():
    cost = line_expansion_cost(100.0, CostingConfig())
    assert cost == pytest.approx(100.0 * 2.74e6 * 0.028768, rel=1e-5)
    assert cost == pytest.approx(7.88e6, rel=1e-3)


def test_line_cost_guards_and_linearity():
    cfg = CostingConfig()
    with pytest.raises(ValueError):
        line_expansion_cost(0.0, cfg)
    assert line_expansion_cost(200.0, cfg) == pytest.approx(2 * line_expansion_cost(100.0, cfg))


def test_hydrogen_pipeline_discount():
    cfg = CostingConfig()
    assert line_expansion_cost(100.0, cfg, hydrogen=True) == pytest.approx(
        0.1 * line_expansion_cost(100.0, cfg))
