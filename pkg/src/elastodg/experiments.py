"""Simulation set-up and the three experiment drivers (convergence, energy, dt scan)."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .diagnostics import (
    EnergyReport, RateTable, check_halving, convergence_rates, energy_norm_ip, energy_norm_mdg,
    error_ip, error_mixed,
)
from .fem import DGSpace, load_vector
from .ip import IpConfig, IpOperator
from .manufactured import Problem, get_problem
from .material import MaterialField
from .mesh import Mesh, MeshConfig, build_cartesian_mesh
from .mixed import MixedOperator
from .timestep import BlowUpError, Leapfrog, Sample, TimeConfig, Trajectory, fit_steps, run_leapfrog, spectral_dt


def _build_material(cfg: RunConfig, mesh: Mesh) -> MaterialField:
    m = cfg.material
    if m.file is not None:
        path = cfg.base_dir / m.file
        return MaterialField.from_csv(path, mesh)
    return MaterialField.uniform(mesh, m.rho, m.lam, m.mu)


class Simulation:
    """One discretisation of one problem: operator, loads, initial data and probes."""

    def __init__(self, cfg: RunConfig, cells=None, degree: int | None = None, ip: IpConfig | None = None):
        self.cfg = cfg
        mesh_cfg = cfg.mesh
        if cells is not None:
            cells = (cells,) * mesh_cfg.dim if np.isscalar(cells) else tuple(cells)
            mesh_cfg = dataclasses.replace(mesh_cfg, cells=cells)
        self.mesh = build_cartesian_mesh(mesh_cfg)
        self.degree = degree or cfg.degree
        self.space = DGSpace(self.mesh, self.degree)
        self.material = _build_material(cfg, self.mesh)
        m = cfg.material
        self.problem: Problem = get_problem(cfg.problem, rho=m.rho, lam=m.lam, mu=m.mu)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # already reported by parse_config
            if cfg.formulation == "ip":
                self.op = IpOperator(self.space, self.material, ip or cfg.ip)
            else:
                self.op = MixedOperator(self.space, self.material, cfg.mixed)
        self.mixed = isinstance(self.op, MixedOperator)
        self._split_load = None
        if self.problem.forcing_split is not None and self.problem.traction is None:
            tf, prof = self.problem.forcing_split
            self._split_load = (tf, load_vector(self.space, lambda x, _t: prof(x)))

    @property
    def n_dofs(self) -> int:
        return self.space.n_dofs

    # -- loads -----------------------------------------------------------------
    def load(self, t: float) -> np.ndarray | None:
        p = self.problem
        if self._split_load is not None:
            tf, b = self._split_load
            F = tf(t) * b
        elif p.forcing is None and p.traction is None:
            return None
        else:
            F = load_vector(self.space, p.forcing, p.traction, t)
        if self.mixed and p.traction is not None and self.op._neumann_c22:
            F = F - self.op.G @ self.op.sigma_solver(self.op.traction_sigma_load(p.traction, t))
        return F

    def has_load(self) -> bool:
        return self.problem.forcing is not None or self.problem.traction is not None

    # -- initial data ------------------------------------------------------------
    def initial_data(self, seed: int | None = None):
        """Nodal interpolants of ``u0, v0``; seeded random coefficients if ``seed`` is given."""
        if seed is not None:
            rng = np.random.default_rng(seed)
            return rng.standard_normal(self.n_dofs), np.zeros(self.n_dofs)
        return self.space.interpolate(self.problem.u0), self.space.interpolate(self.problem.v0)

    # -- probes ------------------------------------------------------------------
    def sigma(self, u, t):
        return self.op.recover_sigma(u, self.problem.traction, t)

    def energy(self, s: Sample) -> float:
        if self.mixed:
            return energy_norm_mdg(self.op, s.u, s.u_t, self.sigma(s.u, s.t))
        return energy_norm_ip(self.op, s.u, s.u_t)

    def error(self, s: Sample, norm: str = "energy") -> float:
        ex = self.problem.exact
        if self.mixed:
            return error_mixed(self.op, s.u, s.u_t, self.sigma(s.u, s.t), ex, s.t, augmented=(norm == "augmented"))
        return error_ip(self.op, s.u, s.u_t, ex, s.t, norm)

    # -- time stepping -----------------------------------------------------------
    def time_steps(self, time: TimeConfig) -> tuple[float, int]:
        return time.steps(self.op, self.mesh, self.material, self.degree)

    def stepper(self, dt: float, damping: str = "centred") -> Leapfrog:
        return Leapfrog(self.op, dt, self.load if self.has_load() else None, damping)

    def run(self, time: TimeConfig, probe=None, dt: float | None = None, seed: int | None = None,
            blowup_check=None) -> Trajectory:
        if dt is None:
            dt, n = self.time_steps(time)
        else:
            dt, n = fit_steps(time.T, dt)
        u0, v0 = self.initial_data(seed)
        return run_leapfrog(self.stepper(dt, time.damping), u0, v0, n, time.stride, probe, blowup_check)


# -- convergence ------------------------------------------------------------------
@dataclass
class CellResult:
    k: int
    cells: int
    h: float
    error: float
    dt: float
    steps: int
    flag: str = ""


def max_error_run(sim: Simulation, time: TimeConfig, norm: str = "energy", dt: float | None = None) -> CellResult:
    """Max over report times of the energy-norm error."""
    traj = sim.run(time, probe=lambda s: sim.error(s, norm), dt=dt)
    cells = sim.mesh.cells[0]
    h = float(sim.mesh.spacing.max())
    if not traj.ok:
        return CellResult(sim.degree, cells, h, math.nan, traj.dt, traj.n_steps, str(traj.blowup))
    err = max(traj.samples)
    if not np.isfinite(err):
        return CellResult(sim.degree, cells, h, math.nan, traj.dt, traj.n_steps, "non-finite error")
    return CellResult(sim.degree, cells, h, float(err), traj.dt, traj.n_steps)


def convergence_study(cfg: RunConfig, levels=None, degrees=None, norm=None, log=None) -> list[RateTable]:
    """Run every (k, level) cell; a failed cell is flagged without stopping the table."""
    if cfg.problem.startswith(("conservation", "zero")):
        raise ValueError("convergence studies need a manufactured problem with an exact solution")
    levels = list(levels or cfg.converge.levels)
    degrees = list(degrees or cfg.converge.degrees)
    norm = norm or cfg.converge.norm
    tables = []
    for k in degrees:
        results = []
        for n in levels:
            sim = Simulation(cfg, cells=n, degree=k)
            res = max_error_run(sim, cfg.time, norm)
            results.append(res)
            if log:
                log(f"k={k} cells={n} dofs={sim.n_dofs} dt={res.dt:.3e} steps={res.steps} "
                    f"error={res.error:.4e} {res.flag}".rstrip())
        h = [r.h for r in results]
        check_halving(h)
        good = [r for r in results if not r.flag]
        if len(good) == len(results):
            tb = convergence_rates([(r.h, r.error) for r in results], k, cfg.method_label)
        else:
            tb = RateTable(k, cfg.method_label, h, [r.error for r in results])
            if len(good) >= 2 and all(a.h == 2 * b.h for a, b in zip(good, good[1:])):
                part = convergence_rates([(r.h, r.error) for r in good], k, cfg.method_label)
                tb.slope = part.slope
        tb.flags = [r.flag for r in results]
        tb.cells = results
        tables.append(tb)
    return tables


# -- energy -------------------------------------------------------------------------
def energy_history(sim: Simulation, time: TimeConfig, dt: float | None = None) -> tuple[EnergyReport, Trajectory]:
    report = EnergyReport()

    def probe(s):
        e = sim.energy(s)
        report.add(s.step, s.t, e)
        return e

    def check(s):
        return None if all(np.isfinite(x).all() for x in (s.u, s.u_t)) else "non-finite state"

    traj = sim.run(time, probe=probe, dt=dt, blowup_check=check)
    return report, traj


# -- critical time step -----------------------------------------------------------------
@dataclass
class ScanResult:
    c_F: float
    dt_star: float
    lo: float
    hi: float
    flag: str = ""


def blows_up(sim: Simulation, dt: float, T: float, threshold: float, seed: int, damping: str) -> bool:
    """Random initial data, no load: does the energy-norm ratio exceed ``threshold`` within ``T``?

    The energy is ``|u_t|_M^2 + |u^T K u|`` with the backward-difference velocity,
    which stays meaningful for the non-symmetric variants.
    """
    dt, n = fit_steps(T, dt)
    u0, v0 = sim.initial_data(seed)
    op = sim.op
    stepper = Leapfrog(op, dt, None, damping)

    def energy(u, v):
        return float(v @ (op.mass @ v)) + abs(float(u @ op.apply_stiffness(u)))

    limit = threshold**2 * energy(u0, v0)
    state = stepper.init(u0, v0)
    for _ in range(n - 1):
        state = stepper.step(state)
        if not np.all(np.isfinite(state.u_curr)):
            return True
        if state.n % 10 == 0 and energy(state.u_curr, (state.u_curr - state.u_prev) / dt) > limit:
            return True
    return False


def critical_dt(sim: Simulation, T: float, threshold: float = 1e6, rtol: float = 0.01, seed: int = 0,
                damping: str = "centred", guess: float | None = None, max_expand: int = 40) -> ScanResult:
    """Bisect the smallest blowing-up step size, bracketing outward from ``guess``."""
    c_F = sim.op.cfg.c_F if not sim.mixed else 0.0
    if guess is None:
        undamped = dataclasses.replace(sim.op.cfg, c_F=0.0) if not sim.mixed else None
        probe_op = sim.op if sim.mixed or c_F == 0 else IpOperator(sim.space, sim.material, undamped)
        try:
            guess = spectral_dt(probe_op)
        except RuntimeError:
            guess = 1e-3
    lo, hi = guess, guess
    for _ in range(max_expand):
        if not blows_up(sim, lo, T, threshold, seed, damping):
            break
        lo /= 2
    else:
        return ScanResult(c_F, math.nan, lo, hi, "no stable step found")
    for _ in range(max_expand):
        if blows_up(sim, hi, T, threshold, seed, damping):
            break
        lo, hi = hi, hi * 2
    else:
        return ScanResult(c_F, math.nan, lo, hi, "no unstable step found")
    if hi == lo:
        hi = 2 * lo
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if blows_up(sim, mid, T, threshold, seed, damping):
            hi = mid
        else:
            lo = mid
    return ScanResult(c_F, 0.5 * (lo + hi), lo, hi)


def dt_scan(cfg: RunConfig, c_F_values=None, seed: int = 0, log=None) -> list[ScanResult]:
    if cfg.formulation != "ip":
        raise ValueError("dtscan is defined for the ip formulation")
    out = []
    for c_F in c_F_values if c_F_values is not None else cfg.dtscan.c_F:
        ip = dataclasses.replace(cfg.ip, c_F=float(c_F))
        sim = Simulation(cfg, ip=ip)
        res = critical_dt(sim, cfg.time.T, cfg.dtscan.threshold, cfg.dtscan.rtol, seed, cfg.time.damping)
        out.append(res)
        if log:
            log(f"c_F={c_F:g} dt*={res.dt_star:.5e} {res.flag}".rstrip())
    return out


def monotone_in_c_F(results: list[ScanResult]) -> bool:
    """Critical step sizes do not increase with the damping coefficient."""
    ok = [r for r in sorted(results, key=lambda r: r.c_F) if not r.flag]
    return all(b.dt_star <= a.dt_star * (1 + 1e-9) for a, b in zip(ok, ok[1:]))


__all__ = [
    "Simulation", "CellResult", "ScanResult", "MeshConfig", "BlowUpError",
    "convergence_study", "max_error_run", "energy_history", "critical_dt", "dt_scan", "monotone_in_c_F",
    "stiffness_matrix", "export_coo", "read_coo",
]


# -- matrix export ------------------------------------------------------------------------
def stiffness_matrix(op):
    """Sparse stiffness of either formulation (the mixed one composed column by column if needed)."""
    import scipy.sparse as sp

    if isinstance(op, MixedOperator):
        return op._K if op._K is not None else sp.csr_matrix(op.dense_stiffness())
    return op.A


def export_coo(matrix, path) -> int:
    """Write ``row col value`` lines (0-based) with a header comment; returns the nonzero count."""
    import scipy.sparse as sp

    m = sp.coo_matrix(matrix)
    order = np.lexsort((m.col, m.row))
    with open(path, "w") as fh:
        fh.write(f"# coo {m.shape[0]} {m.shape[1]} {m.nnz}\n")
        for i in order:
            fh.write(f"{m.row[i]} {m.col[i]} {float(m.data[i])!r}\n")
    return int(m.nnz)


def read_coo(path):
    import scipy.sparse as sp

    with open(path) as fh:
        _, _, nr, nc, _ = fh.readline().split()
        data = np.loadtxt(fh, ndmin=2)
    if data.size == 0:
        return sp.csr_matrix((int(nr), int(nc)))
    return sp.csr_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(int(nr), int(nc)))
