"""Solver backends and independent solution verification.

Three ways to solve an LpProblem:

* ``builtin``  — the bundled revised simplex (desk-scale problems),
* ``scipy``    — scipy.optimize.linprog's HiGHS (default when available),
* ``external:<command template>`` — MPS round-trip through any external
  solver; the template receives ``{mps}``, ``{sol}`` and ``{names}``
  placeholders and must write a solution CSV.

The backend is chosen per call, falling back to the ``ENERCAP_SOLVER``
environment variable.  External results are never trusted blindly: primal
feasibility is re-checked against the original problem.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lp import (
    EQUAL,
    GREATER,
    INF,
    INFEASIBLE,
    ITERATION_LIMIT,
    LESS,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    LpSolution,
)
from .simplex import SimplexOptions, solve_simplex

ENV_SOLVER = "ENERCAP_SOLVER"


@dataclass(frozen=True)
class SolveOptions:
    tolerance: float = 1e-6
    max_iterations: int | None = None
    scaling: bool = True


class SolverError(RuntimeError):
    pass


def default_backend() -> str:
    env = os.environ.get(ENV_SOLVER, "").strip()
    if env:
        return env
    try:
        import scipy.optimize  # noqa: F401

        return "scipy"
    except ImportError:  # pragma: no cover - scipy is a hard dependency
        return "builtin"


def solve(problem: LpProblem, options: SolveOptions | None = None, backend: str | None = None) -> LpSolution:
    opts = options or SolveOptions()
    chosen = backend or default_backend()
    if chosen == "builtin":
        sol = solve_simplex(
            problem,
            SimplexOptions(
                tolerance=min(opts.tolerance, 1e-7),
                max_iterations=opts.max_iterations,
                scaling=opts.scaling,
            ),
        )
    elif chosen == "scipy":
        sol = _solve_scipy(problem, opts)
    elif chosen.startswith("external:"):
        sol = _solve_external(problem, chosen[len("external:"):], opts)
    else:
        raise SolverError(f"unknown solver backend {chosen!r}")
    return sol


def _solve_scipy(problem: LpProblem, opts: SolveOptions) -> LpSolution:
    import scipy.optimize as sopt
    import scipy.sparse as sp

    t0 = time.perf_counter()
    active = problem.active_rows()
    A = problem.matrix().tocsr()[np.flatnonzero(active)]
    rhs = problem.rhs[active]
    senses = [s for s, a in zip(problem.sense, active) if a]

    is_eq = np.array([s == EQUAL for s in senses], dtype=bool)
    is_le = np.array([s == LESS for s in senses], dtype=bool)
    is_ge = np.array([s == GREATER for s in senses], dtype=bool)

    A_eq = A[is_eq] if is_eq.any() else None
    b_eq = rhs[is_eq] if is_eq.any() else None
    ub_rows = sp.vstack([m for m, use in ((A[is_le], is_le.any()), (-A[is_ge], is_ge.any())) if use]) \
        if (is_le.any() or is_ge.any()) else None
    ub_rhs = np.concatenate([v for v, use in ((rhs[is_le], is_le.any()), (-rhs[is_ge], is_ge.any())) if use]) \
        if (is_le.any() or is_ge.any()) else None

    res = sopt.linprog(
        problem.obj,
        A_ub=ub_rows,
        b_ub=ub_rhs,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=np.column_stack([problem.lb, problem.ub]),
        method="highs",
    )
    status = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status, INFEASIBLE)
    x = np.asarray(res.x, dtype=float) if res.x is not None else np.zeros(problem.ncols)
    if status == OPTIMAL:
        _clip_to_bounds(x, problem.lb, problem.ub)

    duals = np.zeros(problem.nrows)
    if status == OPTIMAL:
        act_idx = np.flatnonzero(active)
        if ub_rhs is not None and res.get("ineqlin") is not None:
            marg_ub = np.asarray(res.ineqlin.marginals)
            n_le = int(is_le.sum())
            duals[act_idx[is_le]] = marg_ub[:n_le]
            duals[act_idx[is_ge]] = -marg_ub[n_le:]
        if A_eq is not None and res.get("eqlin") is not None:
            duals[act_idx[is_eq]] = np.asarray(res.eqlin.marginals)

    objective = float(problem.obj @ x) if status == OPTIMAL else float("nan")
    return LpSolution(
        status=status,
        objective=objective,
        x=x,
        duals=duals,
        iterations=int(getattr(res, "nit", 0) or 0),
        wall_time_s=time.perf_counter() - t0,
        backend="scipy",
    )


def _clip_to_bounds(x: np.ndarray, lb: np.ndarray, ub: np.ndarray, tol: float = 1e-9) -> None:
    near_lb = np.isfinite(lb) & (np.abs(x - lb) <= tol * np.maximum(1.0, np.abs(lb)))
    x[near_lb] = lb[near_lb]
    near_ub = np.isfinite(ub) & (np.abs(x - ub) <= tol * np.maximum(1.0, np.abs(ub)))
    x[near_ub] = ub[near_ub]
    np.clip(x, lb, ub, out=x)


def _solve_external(problem: LpProblem, template: str, opts: SolveOptions) -> LpSolution:
    from . import mps

    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="enercap-lp-") as tmp:
        mps_path = Path(tmp) / "problem.mps"
        sol_path = Path(tmp) / "solution.csv"
        names_path = mps.write_mps(problem, mps_path)
        cmd = [
            part.format(mps=str(mps_path), sol=str(sol_path), names=str(names_path))
            for part in shlex.split(template)
        ]
        run = subprocess.run(cmd, capture_output=True, text=True)
        if run.returncode != 0:
            raise SolverError(
                f"external solver failed ({run.returncode}): {run.stderr.strip()[:500]}"
            )
        if not sol_path.exists():
            raise SolverError("external solver produced no solution file")
        sol = mps.import_solution(sol_path.read_bytes(), problem)
    sol.wall_time_s = time.perf_counter() - t0
    sol.backend = "external"
    if sol.status == OPTIMAL:
        report = verify_solution(problem, sol, tol=max(opts.tolerance, 1e-6))
        if not report["primal_feasible"]:
            raise SolverError(
                f"external solution fails feasibility check: residual {report['primal_residual']:.3e}"
            )
    return sol


def verify_solution(problem: LpProblem, sol: LpSolution, tol: float = 1e-6) -> dict:
    """Independent check of primal/dual feasibility and complementary slackness.

    Residuals are relative to the row/bound magnitudes.  Dual conditions are
    only assessed when the solution carries nonzero duals.
    """
    x = sol.x
    A = problem.matrix()
    ax = A @ x if problem.nrows else np.zeros(0)
    scale = np.maximum(1.0, np.abs(problem.rhs))
    primal_res = 0.0
    comp_gap = 0.0
    for i, s in enumerate(problem.sense):
        b = problem.rhs[i]
        if s == LESS:
            viol = (ax[i] - b) / scale[i] if np.isfinite(b) else 0.0
            slack = abs(b - ax[i]) if np.isfinite(b) else INF
        elif s == GREATER:
            viol = (b - ax[i]) / scale[i] if np.isfinite(b) else 0.0
            slack = abs(ax[i] - b) if np.isfinite(b) else INF
        else:
            viol = abs(ax[i] - b) / scale[i]
            slack = 0.0
        primal_res = max(primal_res, float(viol))
        if len(sol.duals) == problem.nrows and np.isfinite(slack):
            comp_gap = max(comp_gap, abs(float(sol.duals[i]) * slack) / scale[i])

    bscale = np.maximum(1.0, np.maximum(np.abs(np.where(np.isfinite(problem.lb), problem.lb, 0.0)),
                                        np.abs(np.where(np.isfinite(problem.ub), problem.ub, 0.0))))
    with np.errstate(invalid="ignore"):
        below = np.where(np.isfinite(problem.lb), (problem.lb - x) / bscale, 0.0)
        above = np.where(np.isfinite(problem.ub), (x - problem.ub) / bscale, 0.0)
    bound_res = float(max(below.max(initial=0.0), above.max(initial=0.0)))

    dual_res = 0.0
    have_duals = len(sol.duals) == problem.nrows and np.abs(sol.duals).sum() > 0
    if have_duals:
        d = problem.obj - (A.T @ sol.duals if problem.nrows else 0.0)
        cscale = np.maximum(1.0, np.abs(problem.obj))
        for j in range(problem.ncols):
            at_lb = np.isfinite(problem.lb[j]) and x[j] <= problem.lb[j] + tol * bscale[j]
            at_ub = np.isfinite(problem.ub[j]) and x[j] >= problem.ub[j] - tol * bscale[j]
            if at_lb and at_ub:
                continue  # fixed variable: any reduced cost admissible
            if at_lb:
                dual_res = max(dual_res, float(-d[j]) / cscale[j])
            elif at_ub:
                dual_res = max(dual_res, float(d[j]) / cscale[j])
            else:
                dual_res = max(dual_res, abs(float(d[j])) / cscale[j])

    return {
        "primal_residual": max(primal_res, bound_res),
        "primal_feasible": max(primal_res, bound_res) <= tol,
        "dual_residual": dual_res,
        "dual_feasible": (not have_duals) or dual_res <= tol,
        "complementarity_gap": comp_gap,
        "complementary": comp_gap <= tol * max(1.0, abs(sol.objective)),
    }


def dual_objective(problem: LpProblem, sol: LpSolution) -> float:
    """Dual objective value implied by the solution's row duals.

    For a minimization this is a lower bound on the optimum (weak duality)
    whenever the duals are dual-feasible.
    """
    A = problem.matrix()
    y = sol.duals
    d = problem.obj - (A.T @ y if problem.nrows else 0.0)
    total = float(np.dot(y, np.where(np.isfinite(problem.rhs), problem.rhs, 0.0)))
    for j in range(problem.ncols):
        dj = float(d[j])
        if dj > 0 and np.isfinite(problem.lb[j]):
            total += dj * problem.lb[j]
        elif dj < 0 and np.isfinite(problem.ub[j]):
            total += dj * problem.ub[j]
    return total
