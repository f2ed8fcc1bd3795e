"""Independent brute-force oracles used to cross-check the solvers."""

from __future__ import annotations

import itertools

import numpy as np

from enercap.lp import EQUAL, GREATER, INF, LESS, LpProblem


def enumerate_vertices(problem: LpProblem, tol: float = 1e-9):
    """Brute-force optimum by enumerating candidate vertices.

    Treats rows and finite bounds as one big inequality system, makes every
    n-subset of constraints tight (equality rows always included), solves
    the square system and keeps feasible points.  Exponential; only for tiny
    problems.

    Returns (status, objective, x).
    """
    n = problem.ncols
    A = problem.matrix().toarray() if problem.nrows else np.zeros((0, n))

    # normal form: rows of (a, b, kind) with kind in {"le", "eq"}; a*x <= b
    normals: list[tuple[np.ndarray, float, str]] = []
    for i, s in enumerate(problem.sense):
        b = problem.rhs[i]
        if s == LESS and np.isfinite(b):
            normals.append((A[i], b, "le"))
        elif s == GREATER and np.isfinite(b):
            normals.append((-A[i], -b, "le"))
        elif s == EQUAL:
            normals.append((A[i], b, "eq"))
    for j in range(n):
        e = np.zeros(n)
        if np.isfinite(problem.ub[j]):
            e = np.zeros(n)
            e[j] = 1.0
            normals.append((e, problem.ub[j], "le"))
        if np.isfinite(problem.lb[j]):
            e = np.zeros(n)
            e[j] = -1.0
            normals.append((e, -problem.lb[j], "le"))

    eq_idx = [i for i, (_, _, kind) in enumerate(normals) if kind == "eq"]
    ineq_idx = [i for i, (_, _, kind) in enumerate(normals) if kind == "le"]
    if len(eq_idx) > n:
        eq_idx = eq_idx[:n]

    best_obj = INF
    best_x = None
    need = n - len(eq_idx)
    if need < 0:
        return "infeasible", INF, None
    for combo in itertools.combinations(ineq_idx, need):
        rows = eq_idx + list(combo)
        M = np.vstack([normals[i][0] for i in rows])
        r = np.array([normals[i][1] for i in rows])
        try:
            x = np.linalg.solve(M, r)
        except np.linalg.LinAlgError:
            continue
        if not np.isfinite(x).all():
            continue
        feas = True
        for a, b, kind in normals:
            v = float(a @ x)
            if kind == "le" and v > b + tol * max(1.0, abs(b)):
                feas = False
                break
            if kind == "eq" and abs(v - b) > tol * max(1.0, abs(b)):
                feas = False
                break
        if feas:
            obj = float(problem.obj @ x)
            if obj < best_obj - 1e-12:
                best_obj = obj
                best_x = x
    if best_x is None:
        return "infeasible", INF, None
    return "optimal", best_obj, best_x
