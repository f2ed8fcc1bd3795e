"""Fixed-format MPS export/import and solution-file ingestion.

Row and column names in an LpProblem encode catalog entries and routinely
exceed the 8-character limit of fixed-format MPS, so the writer mangles
them (``R0000001`` / ``C0000001``) and emits the reversible mapping as a
JSON sidecar.  The reader accepts the writer's output as well as ordinary
whitespace-separated MPS from other tools.

Solutions come back as a CSV of ``column,value`` pairs (original, unmangled
names) with optional ``_status`` and ``_objective`` pseudo-rows.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from .lp import (
    EQUAL,
    GREATER,
    INF,
    LESS,
    OPTIMAL,
    LpProblem,
    LpSolution,
    empty_problem,
)

OBJECTIVE_ROW = "COST"


class MpsFormatError(ValueError):
    """Malformed MPS or solution file; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


def _fmt12(v: float) -> str:
    """Shortest representation of v that fits a 12-character MPS field."""
    for spec in ("%.12g", "%.10g", "%.8g", "%.6g"):
        s = spec % v
        if len(s) <= 12:
            return s
    return "%.5e" % v


def to_mps(problem: LpProblem, name: str | None = None) -> tuple[str, dict]:
    """Render the problem as fixed-format MPS text plus the name-mangling map."""
    rows = {f"R{i + 1:07d}": rn for i, rn in enumerate(problem.row_names)}
    cols = {f"C{j + 1:07d}": cn for j, cn in enumerate(problem.col_names)}
    row_ids = list(rows)
    col_ids = list(cols)

    out = io.StringIO()
    out.write(f"NAME          {(name or problem.name or 'ENERCAP')[:60]}\n")
    out.write("ROWS\n")
    out.write(f" N  {OBJECTIVE_ROW}\n")
    for i, s in enumerate(problem.sense):
        out.write(f" {s}  {row_ids[i]}\n")

    by_col: dict[int, list[tuple[int, float]]] = {}
    for r, c, v in zip(problem.row_idx, problem.col_idx, problem.coef):
        by_col.setdefault(int(c), []).append((int(r), float(v)))

    out.write("COLUMNS\n")
    for j in range(problem.ncols):
        cid = col_ids[j]
        if problem.obj[j] != 0.0:
            out.write(f"    {cid:<8}  {OBJECTIVE_ROW:<8}  {_fmt12(problem.obj[j])}\n")
        for r, v in sorted(by_col.get(j, [])):
            out.write(f"    {cid:<8}  {row_ids[r]:<8}  {_fmt12(v)}\n")

    out.write("RHS\n")
    for i in range(problem.nrows):
        if problem.rhs[i] != 0.0 and np.isfinite(problem.rhs[i]):
            out.write(f"    RHS       {row_ids[i]:<8}  {_fmt12(problem.rhs[i])}\n")
        elif not np.isfinite(problem.rhs[i]):
            # inactive row (unbounded rhs): keep the row, make it non-binding
            big = 1e30 if problem.rhs[i] > 0 else -1e30
            out.write(f"    RHS       {row_ids[i]:<8}  {_fmt12(big)}\n")

    out.write("BOUNDS\n")
    for j in range(problem.ncols):
        cid = col_ids[j]
        lo, up = problem.lb[j], problem.ub[j]
        if lo == up:
            out.write(f" FX BND       {cid:<8}  {_fmt12(lo)}\n")
            continue
        if not np.isfinite(lo) and not np.isfinite(up):
            out.write(f" FR BND       {cid:<8}\n")
            continue
        if not np.isfinite(lo):
            out.write(f" MI BND       {cid:<8}\n")
        elif lo != 0.0:
            out.write(f" LO BND       {cid:<8}  {_fmt12(lo)}\n")
        if np.isfinite(up):
            out.write(f" UP BND       {cid:<8}  {_fmt12(up)}\n")
    out.write("ENDATA\n")

    mapping = {"objective": OBJECTIVE_ROW, "rows": rows, "columns": cols}
    return out.getvalue(), mapping


def write_mps(problem: LpProblem, path: str | Path) -> Path:
    """Write problem.mps plus the name map sidecar; returns the sidecar path."""
    path = Path(path)
    text, mapping = to_mps(problem)
    path.write_text(text, encoding="utf-8")
    names_path = path.with_suffix(path.suffix + ".names.json")
    names_path.write_text(json.dumps(mapping, indent=1, sort_keys=True), encoding="utf-8")
    return names_path


def read_mps(text: str | bytes, names: dict | None = None) -> LpProblem:
    """Parse MPS text back into an LpProblem.

    ``names`` is the writer's mangling map; when given, original row/column
    names are restored.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    section = None
    obj_row: str | None = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    row_pos: dict[str, int] = {}
    col_order: list[str] = []
    col_set: dict[str, int] = {}
    triplets: list[tuple[int, int, float]] = []
    obj: dict[int, float] = {}
    rhs: dict[str, float] = {}
    lo: dict[int, float] = {}
    up: dict[int, float] = {}
    free: set[int] = set()
    minus_inf: set[int] = set()

    def colid(tok: str) -> int:
        if tok not in col_set:
            col_set[tok] = len(col_order)
            col_order.append(tok)
        return col_set[tok]

    for ln, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if raw[0] not in " \t":
            head = raw.split()
            section = head[0].upper()
            if section == "ENDATA":
                break
            if section not in ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "OBJSENSE"):
                raise MpsFormatError(f"unknown section {section!r}", ln)
            continue
        fields = raw.split()
        if section == "ROWS":
            if len(fields) != 2:
                raise MpsFormatError("ROWS entries need a type and a name", ln)
            rtype, rname = fields[0].upper(), fields[1]
            if rtype == "N":
                if obj_row is None:
                    obj_row = rname
            elif rtype in (LESS, EQUAL, GREATER):
                row_sense[rname] = rtype
                row_pos[rname] = len(row_order)
                row_order.append(rname)
            else:
                raise MpsFormatError(f"unknown row type {rtype!r}", ln)
        elif section == "COLUMNS":
            if len(fields) % 2 != 1 or len(fields) < 3:
                raise MpsFormatError("COLUMNS entries are name + (row, value) pairs", ln)
            j = colid(fields[0])
            for k in range(1, len(fields), 2):
                rname, val = fields[k], _parse_num(fields[k + 1], ln)
                if rname == obj_row:
                    obj[j] = obj.get(j, 0.0) + val
                elif rname in row_pos:
                    triplets.append((row_pos[rname], j, val))
                else:
                    raise MpsFormatError(f"unknown row {rname!r}", ln)
        elif section == "RHS":
            for k in range(1, len(fields), 2):
                if k + 1 >= len(fields):
                    raise MpsFormatError("RHS entries are set-name + (row, value) pairs", ln)
                rname, val = fields[k], _parse_num(fields[k + 1], ln)
                if rname not in row_sense:
                    raise MpsFormatError(f"unknown row {rname!r}", ln)
                rhs[rname] = val
        elif section == "BOUNDS":
            btype = fields[0].upper()
            if btype in ("FR", "MI", "PL", "BV"):
                if len(fields) < 3:
                    raise MpsFormatError("bound entry too short", ln)
                j = colid(fields[2])
                if btype == "FR":
                    free.add(j)
                elif btype == "MI":
                    minus_inf.add(j)
            else:
                if len(fields) < 4:
                    raise MpsFormatError("bound entry too short", ln)
                j = colid(fields[2])
                val = _parse_num(fields[3], ln)
                if btype == "UP":
                    up[j] = val
                elif btype == "LO":
                    lo[j] = val
                elif btype == "FX":
                    lo[j] = val
                    up[j] = val
                else:
                    raise MpsFormatError(f"unsupported bound type {btype!r}", ln)
        elif section == "RANGES":
            raise MpsFormatError("RANGES sections are not supported", ln)
        elif section in ("NAME", "OBJSENSE"):
            continue
        elif section is None:
            raise MpsFormatError("data before any section header", ln)

    n, m = len(col_order), len(row_order)
    problem = empty_problem("mps")
    problem.col_names = list(col_order)
    problem.row_names = list(row_order)
    problem.sense = [row_sense[r] for r in row_order]
    problem.obj = np.array([obj.get(j, 0.0) for j in range(n)])
    problem.rhs = np.array([rhs.get(r, 0.0) for r in row_order])
    problem.row_idx = np.array([t[0] for t in triplets], dtype=np.int64)
    problem.col_idx = np.array([t[1] for t in triplets], dtype=np.int64)
    problem.coef = np.array([t[2] for t in triplets], dtype=float)
    lb = np.zeros(n)
    ub = np.full(n, INF)
    for j in range(n):
        if j in free:
            lb[j] = -INF
        if j in minus_inf:
            lb[j] = -INF
        if j in lo:
            lb[j] = lo[j]
        if j in up:
            ub[j] = up[j]
            # classic MPS quirk: a negative upper bound on a default-lower
            # column implies a free lower bound
            if ub[j] < 0 and j not in lo and j not in free and j not in minus_inf:
                lb[j] = -INF
    problem.lb = lb
    problem.ub = ub
    # restore rhs=inf semantics for non-binding rows written by to_mps
    problem.rhs[np.abs(problem.rhs) >= 1e30] = np.where(
        problem.rhs[np.abs(problem.rhs) >= 1e30] > 0, INF, -INF
    )

    if names:
        rmap = names.get("rows", {})
        cmap = names.get("columns", {})
        problem.row_names = [rmap.get(r, r) for r in problem.row_names]
        problem.col_names = [cmap.get(c, c) for c in problem.col_names]
    return problem


def _parse_num(tok: str, ln: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise MpsFormatError(f"not a number: {tok!r}", ln) from None


def export_solution(sol: LpSolution, problem: LpProblem) -> str:
    """Render a solution as the documented column,value CSV."""
    out = io.StringIO()
    out.write("column,value\n")
    out.write(f"_status,{sol.status}\n")
    out.write(f"_objective,{float(sol.objective)!r}\n")
    for name, value in zip(problem.col_names, sol.x):
        out.write(f"{name},{float(value)!r}\n")
    return out.getvalue()


def import_solution(data: bytes | str, problem: LpProblem) -> LpSolution:
    """Parse a solution CSV and align the values with the problem's columns.

    Unknown column names are rejected; columns missing from the file default
    to zero.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    index = {name: j for j, name in enumerate(problem.col_names)}
    x = np.zeros(problem.ncols)
    status = OPTIMAL
    objective: float | None = None
    lines = data.splitlines()
    if not lines or lines[0].strip().lower() != "column,value":
        raise MpsFormatError("solution file must start with 'column,value'", 1)
    for ln, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        name, sep, val = raw.partition(",")
        if not sep:
            raise MpsFormatError("expected 'name,value'", ln)
        name = name.strip()
        val = val.strip()
        if name == "_status":
            status = val
            continue
        if name == "_objective":
            objective = _parse_num(val, ln)
            continue
        if name not in index:
            raise MpsFormatError(f"unknown column {name!r}", ln)
        x[index[name]] = _parse_num(val, ln)
    if objective is None:
        objective = float(problem.obj @ x)
    return LpSolution(
        status=status,
        objective=objective,
        x=x,
        duals=np.zeros(problem.nrows),
        backend="external",
    )
