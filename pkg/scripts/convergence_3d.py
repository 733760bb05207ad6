#!/usr/bin/env python3
"""3D spot check: k = 1 on 4, 8, 16 cells per side and k = 2 on 2, 4, 8, T = 0.25.

Expect tens of minutes for the finest k = 1 level.
"""

import argparse
from pathlib import Path

from elastodg.config import parse_text
from elastodg.diagnostics import RATE_COLUMNS, format_rate_table, rate_rows, write_csv
from elastodg.experiments import convergence_study

BASE = """
[mesh]
dim = 3
cells = 2
[method]
c0 = 10.0
[time]
T = 0.25
cfl = 0.25
[problem]
name = "paper3d"
"""

LEVELS = {1: [4, 8, 16], 2: [2, 4, 8]}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    cfg = parse_text(BASE)
    tables = []
    for k in args.degrees:
        tables += convergence_study(cfg, levels=LEVELS[k], degrees=[k], log=print)
    print(format_rate_table(tables))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "convergence_3d.csv", "rates", RATE_COLUMNS, rate_rows(tables))


if __name__ == "__main__":
    main()
