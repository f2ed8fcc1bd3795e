"""MPS round-trips, name mangling, and the external solver path."""

import json
import shlex
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from enercap import mps
from enercap.builder import build
from enercap.lp import INF, make_problem
from enercap.simplex import solve_simplex
from enercap.solvers import solve

from sysgen import random_lp, random_system

REPO = Path(__file__).resolve().parents[1]


def test_empty_constraint_problem_round_trips():
    p = make_problem("bounds-only", [2.0, -3.0], [], [], [], [1.0, 0.0], [5.0, 4.0])
    text, mapping = mps.to_mps(p)
    assert "ROWS" in text and "ENDATA" in text
    back = mps.read_mps(text, mapping)
    assert back.col_names == p.col_names
    assert back.nrows == 0
    assert np.array_equal(back.obj, p.obj)
    assert np.array_equal(back.lb, p.lb)
    assert np.array_equal(back.ub, p.ub)


@pytest.mark.parametrize("seed", range(8))
def test_random_lp_round_trip_bit_exact(seed):
    rng = np.random.default_rng(500 + seed)
    p = random_lp(rng, max_rows=6, max_cols=6)
    text, mapping = mps.to_mps(p)
    back = mps.read_mps(text, mapping)
    assert back.col_names == p.col_names
    assert back.row_names == p.row_names
    assert back.sense == p.sense
    # values in random_lp are short decimals: representable in the field width
    assert np.array_equal(back.obj, p.obj)
    assert np.array_equal(back.rhs, p.rhs)
    a = p.matrix().toarray()
    b = back.matrix().toarray()
    assert np.array_equal(a, b)
    s1, s2 = solve_simplex(p), solve_simplex(back)
    assert s1.status == s2.status
    if s1.status == "optimal":
        assert s1.objective == s2.objective


def test_name_mangling_is_reversible():
    rng = np.random.default_rng(1)
    system = random_system(rng, horizon=24)
    problem, _ = build(system)
    text, mapping = mps.to_mps(problem)
    long_names = [n for n in problem.col_names if len(n) > 8]
    assert long_names, "builder names should exceed the 8-char MPS limit"
    for line in text.splitlines():
        for tok in line.split():
            if tok.startswith(("C", "R")) and tok[1:].isdigit():
                assert len(tok) <= 8
    back = mps.read_mps(text, mapping)
    assert back.col_names == problem.col_names
    assert back.row_names == problem.row_names


def test_inactive_rows_survive_round_trip():
    p = make_problem("inact", [1.0], [(0, 0, 1.0)], ["L"], [np.inf], [0.0], [4.0])
    text, mapping = mps.to_mps(p)
    back = mps.read_mps(text, mapping)
    assert back.rhs[0] == INF


def test_malformed_mps_reports_line():
    with pytest.raises(mps.MpsFormatError, match="line 3"):
        mps.read_mps("NAME x\nROWS\n Z  R1\n")
    with pytest.raises(mps.MpsFormatError, match="not a number"):
        mps.read_mps("NAME x\nROWS\n N  COST\n L  R1\nCOLUMNS\n    X  R1  abc\n")


def test_solution_csv_round_trip():
    p = make_problem("t", [-1.0, -2.0], [(0, 0, 1.0), (0, 1, 1.0)], ["L"], [4.0],
                     [0.0, 0.0], [3.0, 3.0])
    s = solve_simplex(p)
    csv_text = mps.export_solution(s, p)
    back = mps.import_solution(csv_text, p)
    assert back.status == s.status
    assert np.array_equal(back.x, s.x)
    assert back.objective == s.objective


def test_solution_csv_rejects_unknown_column():
    p = make_problem("t", [1.0], [], [], [], [0.0], [1.0])
    with pytest.raises(mps.MpsFormatError, match="line 2"):
        mps.import_solution("column,value\nnope,1.0\n", p)
    with pytest.raises(mps.MpsFormatError, match="column,value"):
        mps.import_solution("bogus header\n", p)


def test_external_solver_path(tmp_path):
    rng = np.random.default_rng(11)
    system = random_system(rng, horizon=24)
    problem, _ = build(system)
    template = f"{shlex.quote(sys.executable)} {shlex.quote(str(REPO / 'tools' / 'solve_mps.py'))} {{mps}} {{sol}} --names {{names}}"
    ext = solve(problem, backend=f"external:{template}")
    ref = solve(problem, backend="scipy")
    assert ext.status == "optimal"
    assert ext.objective == pytest.approx(ref.objective, rel=1e-6)
