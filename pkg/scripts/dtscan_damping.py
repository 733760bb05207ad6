#!/usr/bin/env python3
"""Critical step size of NIP against the velocity-jump damping coefficient.

Runs both damping discretisations so their opposite trends can be compared.
"""

import argparse
import warnings

from elastodg.config import parse_text
from elastodg.experiments import dt_scan, monotone_in_c_F

BASE = """
[mesh]
dim = 2
cells = {cells}
[method]
theta = 1
degree = {k}
c0 = 10.0
[time]
T = 1.0
damping = "{damping}"
[problem]
name = "zero2d"
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, default=8)
    ap.add_argument("-k", type=int, default=2)
    ap.add_argument("--c-F", type=float, nargs="+", default=[0.0, 1.0, 2.5, 5.0, 10.0])
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    for damping in ("explicit", "centred"):
        cfg = parse_text(BASE.format(cells=args.cells, k=args.k, damping=damping))
        res = dt_scan(cfg, args.c_F, seed=args.seed)
        base = res[0].dt_star
        print(f"[{damping}]")
        for r in res:
            print(f"  c_F = {r.c_F:6g}  dt* = {r.dt_star:.5e}  ratio = {r.dt_star / base:.4f} {r.flag}")
        print(f"  monotone: {monotone_in_c_F(res)}")


if __name__ == "__main__":
    main()
