"""Command line entry point: ``elastodg {converge,energy,dtscan,run} --config FILE``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config
from .diagnostics import (
    ENERGY_COLUMNS, RATE_COLUMNS, energy_rows, format_rate_table, rate_rows, write_csv,
)
from .experiments import (
    Simulation, convergence_study, dt_scan, energy_history, export_coo, monotone_in_c_F, stiffness_matrix,
)

RUN_COLUMNS = ("step", "t", "energy_norm", "error_energy", "energy_ratio")
SCAN_COLUMNS = ("c_F", "dt_star", "lo", "hi", "flag")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _out_path(cfg: RunConfig, out: str | None, name: str) -> Path:
    d = Path(out or cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / f"{cfg.prefix}{name}.csv"


def cmd_converge(cfg: RunConfig, out=None, seed=0) -> int:
    tables = convergence_study(cfg, log=_say)
    path = _out_path(cfg, out, "converge")
    write_csv(path, "rates", RATE_COLUMNS, rate_rows(tables))
    print(format_rate_table(tables))
    print(f"wrote {path}")
    return int(any(f for tb in tables for f in tb.flags))


def cmd_energy(cfg: RunConfig, out=None, seed=0) -> int:
    sim = Simulation(cfg)
    if sim.has_load():
        _say(f"warning: problem {cfg.problem!r} is loaded; energy ratios are not expected to stay bounded")
    report, traj = energy_history(sim, cfg.time)
    path = _out_path(cfg, out, "energy")
    write_csv(path, "energy", ENERGY_COLUMNS, energy_rows(report))
    print(f"wrote {path}")
    if not traj.ok:
        print(f"aborted: {traj.blowup}")
        return 1
    print(f"max ratio = {report.max_ratio!r}")
    return 0


def cmd_dtscan(cfg: RunConfig, out=None, seed=0) -> int:
    results = dt_scan(cfg, seed=seed, log=_say)
    path = _out_path(cfg, out, "dtscan")
    rows = [dict(c_F=r.c_F, dt_star=r.dt_star, lo=r.lo, hi=r.hi, flag=r.flag) for r in results]
    write_csv(path, "dtscan", SCAN_COLUMNS, rows)
    for r in rows:
        print(f"c_F = {r['c_F']:<8g} dt* = {r['dt_star']:.5e} {r['flag']}".rstrip())
    print(f"monotone in c_F: {'yes' if monotone_in_c_F(results) else 'NO'}")
    print(f"wrote {path}")
    return int(any(r.flag for r in results))


def cmd_run(cfg: RunConfig, out=None, seed=0, export_matrix=None) -> int:
    sim = Simulation(cfg)
    if export_matrix:
        nnz = export_coo(stiffness_matrix(sim.op), export_matrix)
        _say(f"exported stiffness ({nnz} nonzeros) to {export_matrix}")
    exact = sim.problem.exact is not None
    rows = []

    def probe(s):
        e = sim.energy(s)
        err = sim.error(s) if exact else None
        rows.append(dict(step=s.step, t=s.t, energy_norm=e, error_energy=err))
        return e

    traj = sim.run(cfg.time, probe=probe)
    e0 = rows[0]["energy_norm"] if rows else 0.0
    for r in rows:
        r["energy_ratio"] = r["energy_norm"] / e0 if e0 > 0 else 0.0
    path = _out_path(cfg, out, "run")
    write_csv(path, "run", RUN_COLUMNS, rows)
    print(f"{sim.space!r}: dt={traj.dt:.4e} steps={traj.n_steps}")
    if exact and rows:
        print(f"max error = {max(r['error_energy'] for r in rows)!r}")
    print(f"wrote {path}")
    if not traj.ok:
        print(f"aborted: {traj.blowup}")
        return 1
    return 0


COMMANDS = {"converge": cmd_converge, "energy": cmd_energy, "dtscan": cmd_dtscan, "run": cmd_run}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="elastodg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="TOML run configuration")
        s.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        s.add_argument("--seed", type=int, default=0, help="seed for random probe data")
        if name == "run":
            s.add_argument("--export-matrix", default=None, help="write the stiffness matrix as row col value")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except ConfigError as err:
        print(err, file=sys.stderr)
        return 2
    except FileNotFoundError:
        print(f"config file not found: {args.config}", file=sys.stderr)
        return 2
    for w in cfg.warnings:
        _say(f"warning: {w}")
    if args.seed < 0 or args.seed >= 2**64:
        print("--seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    kwargs = dict(out=args.out, seed=args.seed)
    if args.command == "run":
        kwargs["export_matrix"] = args.export_matrix
    try:
        return COMMANDS[args.command](cfg, **kwargs)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
