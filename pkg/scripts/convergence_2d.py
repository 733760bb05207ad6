#!/usr/bin/env python3
"""SIP(1/2) convergence on the 2D manufactured solution, k = 1..3.

Prints the rate table in the plain energy norm and, with ``--augmented``, in
the augmented norm as well.  Results go to ``results/convergence_2d_<norm>.csv``.
"""

import argparse
from pathlib import Path

from elastodg.config import parse_text
from elastodg.diagnostics import RATE_COLUMNS, format_rate_table, rate_rows, write_csv
from elastodg.experiments import convergence_study

BASE = """
[mesh]
dim = 2
cells = 4
[method]
c0 = 10.0
[time]
T = 0.5
cfl = 0.25
[problem]
name = "paper2d"
"""

LEVELS = {1: [4, 8, 16, 32, 64], 2: [4, 8, 16, 32], 3: [4, 8, 16, 32]}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--augmented", action="store_true", help="also tabulate the augmented norm")
    ap.add_argument("--degrees", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    cfg = parse_text(BASE)
    norms = ["energy", "augmented"] if args.augmented else ["energy"]
    for norm in norms:
        tables = []
        for k in args.degrees:
            tables += convergence_study(cfg, levels=LEVELS[k], degrees=[k], norm=norm, log=print)
        print(f"\n[{norm} norm]\n{format_rate_table(tables)}\n")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / f"convergence_2d_{norm}.csv", "rates", RATE_COLUMNS, rate_rows(tables))


if __name__ == "__main__":
    main()
