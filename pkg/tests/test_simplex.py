"""Built-in simplex against brute-force vertex enumeration and scipy."""

import numpy as np
import pytest

from enercap.lp import INF, LpProblem, make_problem
from enercap.simplex import SimplexOptions, solve_simplex
from enercap.solvers import dual_objective, solve, verify_solution

from oracles import enumerate_vertices
from sysgen import random_lp


def test_single_bound():
    p = make_problem("t", [1.0], [(0, 0, 1.0)], ["G"], [3.0], [0.0], [INF])
    s = solve_simplex(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(3.0, abs=1e-9)


def test_degenerate_tie_is_deterministic():
    # both constraints active at the optimum: a pivot tie
    p = make_problem(
        "degen",
        [-1.0, -1.0],
        [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)],
        ["L", "L"],
        [2.0, 2.0],
        [0.0, 0.0],
        [INF, INF],
    )
    runs = [solve_simplex(p) for _ in range(3)]
    assert all(s.status == "optimal" for s in runs)
    assert all(s.objective == runs[0].objective for s in runs)
    assert all(np.array_equal(s.x, runs[0].x) for s in runs)
    assert runs[0].objective == pytest.approx(-2.0, abs=1e-9)


def test_bound_flip_path():
    # optimum at upper bounds, reachable only via bound flips
    p = make_problem(
        "flip",
        [-1.0, -1.0],
        [(0, 0, 1.0), (0, 1, 1.0)],
        ["L"],
        [100.0],
        [0.0, 0.0],
        [2.0, 3.0],
    )
    s = solve_simplex(p)
    assert s.status == "optimal"
    assert s.x == pytest.approx([2.0, 3.0])


def test_free_variable():
    # min x + y, x + y >= -5, y >= 0, x free
    p = make_problem(
        "free",
        [1.0, 1.0],
        [(0, 0, 1.0), (0, 1, 1.0)],
        ["G"],
        [-5.0],
        [-INF, 0.0],
        [INF, INF],
    )
    s = solve_simplex(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(-5.0, abs=1e-8)


def test_infeasible_and_unbounded():
    p = make_problem("inf", [1.0], [(0, 0, 1.0), (1, 0, 1.0)], ["L", "G"], [1.0, 2.0], [0.0], [INF])
    assert solve_simplex(p).status == "infeasible"
    p = make_problem("unb", [-1.0], [(0, 0, 1.0)], ["G"], [0.0], [0.0], [INF])
    assert solve_simplex(p).status == "unbounded"


def test_iteration_limit_reported():
    p = make_problem(
        "lim",
        [-1.0, -2.0],
        [(0, 0, 1.0), (0, 1, 1.0)],
        ["L"],
        [4.0],
        [0.0, 0.0],
        [3.0, 3.0],
    )
    s = solve_simplex(p, SimplexOptions(max_iterations=1))
    assert s.status == "iteration-limit"


def test_no_rows_problem():
    p = make_problem("bounds-only", [2.0, -3.0], [], [], [], [1.0, 0.0], [5.0, 4.0])
    s = solve_simplex(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(2.0 * 1.0 - 3.0 * 4.0)


def test_objective_scaling_invariance():
    rng = np.random.default_rng(7)
    p = random_lp(rng)
    s1 = solve_simplex(p)
    p2 = p.copy()
    p2.obj = p.obj * 37.0
    s2 = solve_simplex(p2)
    assert s1.status == s2.status
    if s1.status == "optimal":
        assert s2.objective == pytest.approx(37.0 * s1.objective, rel=1e-7, abs=1e-7)
        assert np.allclose(s1.x, s2.x, atol=1e-7)


@pytest.mark.parametrize("seed", range(40))
def test_random_lps_match_vertex_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    p = random_lp(rng)
    status, obj, _ = enumerate_vertices(p)
    s = solve_simplex(p)
    assert s.status == status, f"seed {seed}: {s.status} vs oracle {status}"
    if status == "optimal":
        assert s.objective == pytest.approx(obj, rel=1e-6, abs=1e-6)
        report = verify_solution(p, s, tol=1e-6)
        assert report["primal_feasible"], report
        assert report["dual_feasible"], report
        assert report["complementary"], report
        # weak duality via the reported duals
        assert dual_objective(p, s) <= s.objective + 1e-6 * max(1.0, abs(s.objective))


@pytest.mark.parametrize("seed", range(12))
def test_random_lps_match_scipy(seed):
    rng = np.random.default_rng(33 + seed)
    p = random_lp(rng, max_rows=12, max_cols=14)
    a = solve_simplex(p)
    b = solve(p, backend="scipy")
    assert a.status == b.status
    if a.status == "optimal":
        assert a.objective == pytest.approx(b.objective, rel=1e-6, abs=1e-6)


def test_determinism_bitwise():
    for seed in (5, 6, 7):
        rng = np.random.default_rng(seed)
        p = random_lp(rng, max_rows=10, max_cols=10)
        s1 = solve_simplex(p)
        s2 = solve_simplex(p)
        assert s1.status == s2.status
        assert np.array_equal(s1.x, s2.x)
        assert s1.objective == s2.objective or (
            np.isnan(s1.objective) and np.isnan(s2.objective)
        )
