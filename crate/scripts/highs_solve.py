#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write `name value` lines.

Usage as a solver template:

    PESP_SOLVER_CMD='python3 scripts/highs_solve.py {mps} {sol}'

Exits nonzero unless HiGHS reports an optimal solution.
"""

import sys

import highspy


def main() -> int:
    if len(sys.argv) != 3:
        print("usage: highs_solve.py MODEL.mps SOLUTION.txt", file=sys.stderr)
        return 64
    mps, sol = sys.argv[1], sys.argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-9)
    if h.readModel(mps) != highspy.HighsStatus.kOk:
        print(f"cannot read {mps}", file=sys.stderr)
        return 2
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        print(f"solver status: {h.modelStatusToString(status)}", file=sys.stderr)
        return 3
    names = h.getLp().col_names_
    values = h.getSolution().col_value
    with open(sol, "w", encoding="utf-8") as f:
        for name, value in zip(names, values):
            f.write(f"{name} {value!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
