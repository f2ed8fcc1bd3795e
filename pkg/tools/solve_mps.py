#!/usr/bin/env python3
"""Standalone LP solver speaking the MPS/solution-CSV interface.

Reads a fixed-format MPS file (plus the optional name-map sidecar), solves
it, and writes the documented ``column,value`` CSV.  Plugs into the engine
via::

    ENERCAP_SOLVER="external:python3 tools/solve_mps.py {mps} {sol} --names {names}"
"""

import argparse
import json
import sys
from pathlib import Path

from enercap import mps
from enercap.solvers import solve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("mps_file", type=Path)
    parser.add_argument("solution_file", type=Path)
    parser.add_argument("--names", type=Path, default=None,
                        help="name-map sidecar written next to the MPS file")
    parser.add_argument("--backend", default="scipy", choices=["scipy", "builtin"])
    args = parser.parse_args(argv)

    names = None
    if args.names and args.names.exists():
        names = json.loads(args.names.read_text(encoding="utf-8"))
    problem = mps.read_mps(args.mps_file.read_text(encoding="utf-8"), names)
    solution = solve(problem, backend=args.backend)
    args.solution_file.write_text(mps.export_solution(solution, problem), encoding="utf-8")
    return 0 if solution.status == "optimal" else 1


if __name__ == "__main__":
    sys.exit(main())
