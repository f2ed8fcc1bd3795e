"""Sparse LP container shared by the builder, the solvers, and the MPS codec.

Rows carry a sense in {L, E, G} (<=, ==, >=).  A row whose right-hand side
can never bind (+inf with L, -inf with G) counts as inactive and is skipped
by the solvers.  Column and row names encode their semantic origin and are
reversible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

LESS, EQUAL, GREATER = "L", "E", "G"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"

INF = float("inf")


@dataclass
class LpProblem:
    name: str
    obj: np.ndarray
    row_idx: np.ndarray
    col_idx: np.ndarray
    coef: np.ndarray
    sense: list[str]
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    col_names: list[str]
    row_names: list[str]
    overlays: tuple[str, ...] = ()

    @property
    def ncols(self) -> int:
        return len(self.col_names)

    @property
    def nrows(self) -> int:
        return len(self.row_names)

    @property
    def nnz(self) -> int:
        return len(self.coef)

    def copy(self) -> "LpProblem":
        return LpProblem(
            name=self.name,
            obj=self.obj.copy(),
            row_idx=self.row_idx.copy(),
            col_idx=self.col_idx.copy(),
            coef=self.coef.copy(),
            sense=list(self.sense),
            rhs=self.rhs.copy(),
            lb=self.lb.copy(),
            ub=self.ub.copy(),
            col_names=list(self.col_names),
            row_names=list(self.row_names),
            overlays=self.overlays,
        )

    def matrix(self):
        """Constraint matrix as CSR."""
        import scipy.sparse as sp

        return sp.csr_matrix(
            (self.coef, (self.row_idx, self.col_idx)), shape=(self.nrows, self.ncols)
        )

    def active_rows(self) -> np.ndarray:
        """Boolean mask of rows whose right-hand side can bind."""
        mask = np.ones(self.nrows, dtype=bool)
        for i, (s, b) in enumerate(zip(self.sense, self.rhs)):
            if (s == LESS and b == INF) or (s == GREATER and b == -INF):
                mask[i] = False
        return mask

    def add_row(self, name: str, sense: str, rhs: float, entries: list[tuple[int, float]]) -> int:
        """Append one constraint row; returns its index."""
        if sense not in (LESS, EQUAL, GREATER):
            raise ValueError(f"unknown sense {sense!r}")
        i = self.nrows
        self.row_names.append(name)
        self.sense.append(sense)
        self.rhs = np.append(self.rhs, float(rhs))
        if entries:
            cols = np.array([c for c, _ in entries], dtype=np.int64)
            vals = np.array([v for _, v in entries], dtype=float)
            self.row_idx = np.concatenate([self.row_idx, np.full(len(entries), i, dtype=np.int64)])
            self.col_idx = np.concatenate([self.col_idx, cols])
            self.coef = np.concatenate([self.coef, vals])
        return i

    def validate(self) -> list[str]:
        """Structural checks: index ranges, finite coefficients, duplicates."""
        problems: list[str] = []
        if len(self.row_idx) != len(self.col_idx) or len(self.col_idx) != len(self.coef):
            problems.append("triplet arrays have mismatched lengths")
            return problems
        if self.nnz:
            if self.row_idx.min() < 0 or self.row_idx.max() >= self.nrows:
                problems.append("row index out of range")
            if self.col_idx.min() < 0 or self.col_idx.max() >= self.ncols:
                problems.append("column index out of range")
            if not np.isfinite(self.coef).all():
                problems.append("non-finite coefficient")
            pairs = self.row_idx.astype(np.int64) * max(self.ncols, 1) + self.col_idx
            if len(np.unique(pairs)) != len(pairs):
                problems.append("duplicate (row, col) entry")
        if not np.isfinite(self.obj).all():
            problems.append("non-finite objective coefficient")
        if len(self.obj) != self.ncols or len(self.lb) != self.ncols or len(self.ub) != self.ncols:
            problems.append("column array lengths disagree")
        if len(self.rhs) != self.nrows or len(self.sense) != self.nrows:
            problems.append("row array lengths disagree")
        if self.nrows and not all(s in (LESS, EQUAL, GREATER) for s in self.sense):
            problems.append("unknown row sense")
        if np.any(self.lb > self.ub):
            problems.append("lower bound above upper bound")
        return problems


@dataclass
class LpSolution:
    status: str
    objective: float
    x: np.ndarray
    duals: np.ndarray
    iterations: int = 0
    wall_time_s: float = 0.0
    backend: str = ""

    def value(self, problem: LpProblem, col_name: str) -> float:
        return float(self.x[problem.col_names.index(col_name)])


def empty_problem(name: str = "lp") -> LpProblem:
    return LpProblem(
        name=name,
        obj=np.zeros(0),
        row_idx=np.zeros(0, dtype=np.int64),
        col_idx=np.zeros(0, dtype=np.int64),
        coef=np.zeros(0),
        sense=[],
        rhs=np.zeros(0),
        lb=np.zeros(0),
        ub=np.zeros(0),
        col_names=[],
        row_names=[],
    )


def make_problem(
    name: str,
    obj,
    triplets,
    sense,
    rhs,
    lb,
    ub,
    col_names=None,
    row_names=None,
) -> LpProblem:
    """Assemble a problem from plain sequences (mainly for tests)."""
    obj = np.asarray(obj, dtype=float)
    ncols = len(obj)
    rows = np.asarray([t[0] for t in triplets], dtype=np.int64)
    cols = np.asarray([t[1] for t in triplets], dtype=np.int64)
    vals = np.asarray([t[2] for t in triplets], dtype=float)
    nrows = len(rhs)
    return LpProblem(
        name=name,
        obj=obj,
        row_idx=rows,
        col_idx=cols,
        coef=vals,
        sense=list(sense),
        rhs=np.asarray(rhs, dtype=float),
        lb=np.asarray(lb, dtype=float),
        ub=np.asarray(ub, dtype=float),
        col_names=list(col_names) if col_names else [f"x{j}" for j in range(ncols)],
        row_names=list(row_names) if row_names else [f"r{i}" for i in range(nrows)],
    )
