"""Bounded-variable revised primal simplex.

Two-phase method with artificial variables, Dantzig pricing with a Bland's
rule fallback against cycling, bound flips, and product-form eta updates on
top of a periodically refreshed sparse LU factorization of the basis.
Geometric-mean row/column scaling is applied by default.

Intended for desk-scale problems (up to roughly 50k nonzeros); larger
instances should go through the MPS export path or the scipy backend.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lp import (
    EQUAL,
    GREATER,
    INF,
    ITERATION_LIMIT,
    LESS,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    LpSolution,
)

AT_LOWER, AT_UPPER, BASIC, FREE = 0, 1, 2, 3


@dataclass(frozen=True)
class SimplexOptions:
    tolerance: float = 1e-7        # absolute pivot / reduced-cost tolerance
    max_iterations: int | None = None
    scaling: bool = True
    refactor_every: int = 64
    bland_after: int = 40          # consecutive degenerate pivots before Bland


def solve_simplex(problem: LpProblem, options: SimplexOptions | None = None) -> LpSolution:
    opts = options or SimplexOptions()
    t0 = time.perf_counter()

    active = problem.active_rows()
    keep = np.flatnonzero(active)
    row_map = -np.ones(problem.nrows, dtype=np.int64)
    row_map[keep] = np.arange(len(keep))

    mask = active[problem.row_idx]
    A = sp.csc_matrix(
        (problem.coef[mask], (row_map[problem.row_idx[mask]], problem.col_idx[mask])),
        shape=(len(keep), problem.ncols),
    )
    A.sum_duplicates()
    b = problem.rhs[keep].astype(float)
    sense = [problem.sense[i] for i in keep]
    n = problem.ncols
    m = len(keep)

    lb = problem.lb.astype(float).copy()
    ub = problem.ub.astype(float).copy()
    c = problem.obj.astype(float).copy()

    if opts.scaling and m > 0 and A.nnz > 0:
        rscale, cscale = _geometric_scaling(A)
    else:
        rscale, cscale = np.ones(m), np.ones(n)

    As = sp.diags(rscale) @ A @ sp.diags(cscale) if m > 0 else A
    bs = b * rscale
    with np.errstate(invalid="ignore"):
        lbs = np.where(np.isfinite(lb), lb / cscale, lb)
        ubs = np.where(np.isfinite(ub), ub / cscale, ub)
    cs = c * cscale

    core = _Simplex(As.tocsc(), bs, sense, lbs, ubs, cs, opts)
    status, iterations = core.run()

    x = np.zeros(n)
    duals = np.zeros(problem.nrows)
    if status in (OPTIMAL, ITERATION_LIMIT):
        xs = core.solution_values()[:n]
        x = xs * cscale
        _snap_to_bounds(x, problem.lb, problem.ub)
        ys = core.dual_values()
        duals[keep] = ys * rscale
    objective = float(problem.obj @ x) if status in (OPTIMAL, ITERATION_LIMIT) else float("nan")
    return LpSolution(
        status=status,
        objective=objective,
        x=x,
        duals=duals,
        iterations=iterations,
        wall_time_s=time.perf_counter() - t0,
        backend="builtin",
    )


def _snap_to_bounds(x: np.ndarray, lb: np.ndarray, ub: np.ndarray, tol: float = 1e-9) -> None:
    near_lb = np.isfinite(lb) & (np.abs(x - lb) <= tol * np.maximum(1.0, np.abs(lb)))
    x[near_lb] = lb[near_lb]
    near_ub = np.isfinite(ub) & (np.abs(x - ub) <= tol * np.maximum(1.0, np.abs(ub)))
    x[near_ub] = ub[near_ub]


def _geometric_scaling(A: sp.spmatrix, passes: int = 2) -> tuple[np.ndarray, np.ndarray]:
    m, n = A.shape
    R = np.ones(m)
    C = np.ones(n)
    for _ in range(passes):
        csr = (sp.diags(R) @ A @ sp.diags(C)).tocsr()
        R *= _axis_scale(np.abs(csr.data), csr.indptr, m)
        csc = (sp.diags(R) @ A @ sp.diags(C)).tocsc()
        C *= _axis_scale(np.abs(csc.data), csc.indptr, n)
    return R, C


def _axis_scale(absdata: np.ndarray, indptr: np.ndarray, count: int) -> np.ndarray:
    scale = np.ones(count)
    for i in range(count):
        seg = absdata[indptr[i]:indptr[i + 1]]
        seg = seg[seg > 0]
        if seg.size:
            scale[i] = 1.0 / np.sqrt(float(seg.max()) * float(seg.min()))
    return scale


class _Simplex:
    """Core iteration engine on the equality form [A | I_slack | D_art] x = b."""

    def __init__(self, A, b, sense, lb, ub, c, opts: SimplexOptions):
        self.opts = opts
        self.tol = opts.tolerance
        m, n = A.shape
        self.m = m
        self.n_struct = n

        slack_lb = np.zeros(m)
        slack_ub = np.zeros(m)
        for i, s in enumerate(sense):
            if s == LESS:
                slack_lb[i], slack_ub[i] = 0.0, INF
            elif s == GREATER:
                slack_lb[i], slack_ub[i] = -INF, 0.0
            else:
                slack_lb[i], slack_ub[i] = 0.0, 0.0

        self.lb = np.concatenate([lb, slack_lb, np.zeros(m)])
        self.ub = np.concatenate([ub, slack_ub, np.full(m, INF)])
        self.c_struct = np.concatenate([c, np.zeros(2 * m)])
        self.b = b.astype(float)

        self.vstat = np.empty(n + 2 * m, dtype=np.int8)
        for j in range(n + m):
            if np.isfinite(self.lb[j]):
                self.vstat[j] = AT_LOWER
            elif np.isfinite(self.ub[j]):
                self.vstat[j] = AT_UPPER
            else:
                self.vstat[j] = FREE

        # artificial signs make the initial basic values nonnegative
        nb_vals = self._nonbasic_values(np.arange(n + m))
        eye = sp.eye(m, format="csc")
        resid = self.b - (sp.hstack([A, eye], format="csc") @ nb_vals if m else np.zeros(0))
        signs = np.where(resid >= 0, 1.0, -1.0)
        art = sp.diags(signs, format="csc") if m else sp.csc_matrix((0, 0))
        self.A = sp.hstack([A, eye, art], format="csc") if m else sp.csc_matrix((0, n + 0))
        self.ncols = n + 2 * m
        self.art_start = n + m

        self.basis = np.arange(self.art_start, self.ncols, dtype=np.int64)
        self.vstat[self.basis] = BASIC
        self.xB = np.abs(resid)

        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []
        self.in_phase1 = True

    # -- linear algebra ---------------------------------------------------

    def _refactor(self) -> None:
        if self.m == 0:
            return
        B = self.A[:, self.basis]
        self.lu = spla.splu(B.tocsc())
        self.etas = []
        nb_vals = np.zeros(self.ncols)
        nb = self.vstat != BASIC
        nb_vals[nb] = self._nonbasic_values(np.flatnonzero(nb))
        self.xB = self.lu.solve(self.b - self.A @ nb_vals)

    def _nonbasic_values(self, cols: np.ndarray) -> np.ndarray:
        vals = np.zeros(len(cols))
        st = self.vstat[cols]
        vals[st == AT_LOWER] = self.lb[cols[st == AT_LOWER]]
        vals[st == AT_UPPER] = self.ub[cols[st == AT_UPPER]]
        return vals

    def _ftran(self, v: np.ndarray) -> np.ndarray:
        z = self.lu.solve(v)
        for r, w in self.etas:
            zr = z[r] / w[r]
            z -= w * zr
            z[r] = zr
        return z

    def _btran(self, v: np.ndarray) -> np.ndarray:
        z = v.copy()
        for r, w in reversed(self.etas):
            zr = (z[r] - (w @ z) + w[r] * z[r]) / w[r]
            z[r] = zr
        return self.lu.solve(z, trans="T")

    # -- iteration --------------------------------------------------------

    def run(self) -> tuple[str, int]:
        if self.m == 0:
            return self._solve_unconstrained()
        max_iter = self.opts.max_iterations or max(5000, 40 * (self.m + self.n_struct))
        self._refactor()
        total_iters = 0

        c1 = np.zeros(self.ncols)
        c1[self.art_start:] = 1.0
        status, it = self._iterate(c1, max_iter, phase=1)
        total_iters += it
        if status == ITERATION_LIMIT:
            return status, total_iters
        infeas = float(np.abs(self.xB[self.basis >= self.art_start]).sum())
        if infeas > 1e-7 * max(1.0, float(np.abs(self.b).max(initial=0.0))):
            return INFEASIBLE, total_iters

        # pin artificials at zero for phase 2
        self.ub[self.art_start:] = 0.0
        self.in_phase1 = False
        remaining = max_iter - total_iters
        if remaining <= 0:
            return ITERATION_LIMIT, total_iters
        status, it = self._iterate(self.c_struct, remaining, phase=2)
        total_iters += it
        return status, total_iters

    def _solve_unconstrained(self) -> tuple[str, int]:
        x = np.zeros(self.ncols)
        for j in range(self.n_struct):
            cj = self.c_struct[j]
            if cj > 0:
                if not np.isfinite(self.lb[j]):
                    return UNBOUNDED, 0
                x[j] = self.lb[j]
            elif cj < 0:
                if not np.isfinite(self.ub[j]):
                    return UNBOUNDED, 0
                x[j] = self.ub[j]
            else:
                x[j] = self.lb[j] if np.isfinite(self.lb[j]) else 0.0
            self.vstat[j] = AT_LOWER if x[j] == self.lb[j] else AT_UPPER
        self._x_unconstrained = x
        return OPTIMAL, 0

    def _iterate(self, c: np.ndarray, max_iter: int, phase: int) -> tuple[str, int]:
        tol = self.tol
        degen_streak = 0
        bland = False
        AT = self.A.T.tocsr()

        for it in range(max_iter):
            if len(self.etas) >= self.opts.refactor_every:
                self._refactor()

            y = self._btran(c[self.basis])
            d = c - AT @ y

            fixed = self.lb == self.ub
            nonbasic = self.vstat != BASIC
            candidates = nonbasic & ~fixed
            score = np.zeros(self.ncols)
            low = candidates & (self.vstat == AT_LOWER) & (d < -tol)
            upp = candidates & (self.vstat == AT_UPPER) & (d > tol)
            fre = candidates & (self.vstat == FREE) & (np.abs(d) > tol)
            score[low] = -d[low]
            score[upp] = d[upp]
            score[fre] = np.abs(d[fre])
            eligible = np.flatnonzero(score > 0)
            if eligible.size == 0:
                return OPTIMAL, it

            if bland:
                e = int(eligible[0])
            else:
                e = int(eligible[np.argmax(score[eligible])])
            sigma = 1.0 if (self.vstat[e] == AT_LOWER or (self.vstat[e] == FREE and d[e] < 0)) else -1.0

            w = self._ftran(self.A[:, [e]].toarray().ravel())

            # ratio test: how far can the entering variable move
            t_best = INF
            leave_pos = -1
            leave_to = AT_LOWER
            span = self.ub[e] - self.lb[e]
            if np.isfinite(span):
                t_best = span

            delta = -sigma * w
            with np.errstate(divide="ignore", invalid="ignore"):
                dn = np.where(delta < -tol, delta, np.nan)
                up = np.where(delta > tol, delta, np.nan)
                lim_dn = (self.lb[self.basis] - self.xB) / dn
                lim_up = (self.ub[self.basis] - self.xB) / up
            lim = np.where(np.isnan(lim_dn), lim_up, lim_dn)
            lim = np.where(np.isnan(lim), INF, np.maximum(lim, 0.0))

            finite = np.flatnonzero(np.isfinite(lim))
            if finite.size:
                t_min = float(lim[finite].min())
                if t_min < t_best:
                    ties = finite[lim[finite] <= t_min + 1e-10]
                    if bland:
                        leave_pos = int(ties[np.argmin(self.basis[ties])])
                    else:
                        leave_pos = int(ties[np.argmax(np.abs(w[ties]))])
                    t_best = max(t_min, 0.0)
                    leave_to = AT_LOWER if delta[leave_pos] < 0 else AT_UPPER

            if not np.isfinite(t_best):
                if phase == 1:
                    raise ArithmeticError("phase-1 objective cannot be unbounded")
                return UNBOUNDED, it

            degen_streak = degen_streak + 1 if t_best <= tol else 0
            if degen_streak > self.opts.bland_after:
                bland = True
            elif t_best > tol:
                bland = False

            start = (
                self.lb[e]
                if self.vstat[e] == AT_LOWER
                else (self.ub[e] if self.vstat[e] == AT_UPPER else 0.0)
            )
            self.xB += delta * t_best
            if leave_pos < 0:
                # bound flip: entering variable crosses to its other bound
                self.vstat[e] = AT_UPPER if self.vstat[e] == AT_LOWER else AT_LOWER
            else:
                lv = int(self.basis[leave_pos])
                self.vstat[lv] = leave_to
                if not np.isfinite(self.lb[lv]) and leave_to == AT_LOWER:
                    self.vstat[lv] = FREE
                if not np.isfinite(self.ub[lv]) and leave_to == AT_UPPER:
                    self.vstat[lv] = FREE
                self.basis[leave_pos] = e
                self.vstat[e] = BASIC
                self.xB[leave_pos] = start + sigma * t_best
                self.etas.append((leave_pos, w))
        return ITERATION_LIMIT, max_iter

    # -- extraction -------------------------------------------------------

    def solution_values(self) -> np.ndarray:
        if self.m == 0:
            return self._x_unconstrained
        x = np.zeros(self.ncols)
        nb = self.vstat != BASIC
        x[np.flatnonzero(nb)] = self._nonbasic_values(np.flatnonzero(nb))
        x[self.basis] = self.xB
        return x

    def dual_values(self) -> np.ndarray:
        if self.m == 0:
            return np.zeros(0)
        return self._btran(self.c_struct[self.basis])
