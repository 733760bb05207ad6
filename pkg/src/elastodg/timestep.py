"""Explicit leapfrog integration of ``M u_tt + C u_t + K u = F(t)``.

The stepper only needs an operator exposing ``n_dofs``, ``apply_stiffness``,
``apply_mass``, ``solve_mass`` and ``damping`` (a sparse matrix or ``None``).
Both ``IpOperator`` and ``MixedOperator`` satisfy this.

The damping term is centred by default, which needs one sparse solve with
``M + dt/2 C`` per step.  ``damping="explicit"`` uses the backward velocity
``(u^n - u^{n-1}) / dt`` instead and stays fully explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .material import MaterialField
from .mesh import Mesh

DAMPING_SCHEMES = ("centred", "explicit")
DT_RULES = ("spectral", "heuristic")


class BlowUpError(RuntimeError):
    def __init__(self, step: int, t: float, reason: str = "non-finite displacement"):
        super().__init__(f"blow-up at step {step} (t={t:.6g}): {reason}")
        self.step, self.t, self.reason = step, t, reason


@dataclass
class TimeConfig:
    T: float
    dt: float | None = None
    cfl: float | None = None
    stride: int = 10
    damping: str = "centred"
    # "spectral": dt = cfl * spectral_dt(op); "heuristic": dt = estimate_dt(...)
    dt_rule: str = "spectral"

    def validate(self) -> list[str]:
        errors = []
        if not self.T > 0:
            errors.append(f"time.T must be > 0, got {self.T}")
        if (self.dt is None) == (self.cfl is None):
            errors.append("exactly one of time.dt and time.cfl must be given")
        if self.dt is not None and not self.dt > 0:
            errors.append(f"time.dt must be > 0, got {self.dt}")
        if self.cfl is not None and not 0 < self.cfl <= 1:
            errors.append(f"time.cfl must lie in (0, 1], got {self.cfl}")
        if int(self.stride) != self.stride or self.stride < 1:
            errors.append(f"time.stride must be a positive integer, got {self.stride}")
        if self.damping not in DAMPING_SCHEMES:
            errors.append(f"time.damping must be one of {DAMPING_SCHEMES}, got {self.damping!r}")
        if self.dt_rule not in DT_RULES:
            errors.append(f"time.dt_rule must be one of {DT_RULES}, got {self.dt_rule!r}")
        return errors

    def base_dt(self, op, mesh: Mesh, material: MaterialField, k: int) -> float:
        if self.dt is not None:
            return float(self.dt)
        if self.dt_rule == "heuristic":
            return estimate_dt(mesh, material, k, self.cfl)
        return self.cfl * spectral_dt(op)

    def steps(self, op, mesh: Mesh, material: MaterialField, k: int) -> tuple[float, int]:
        """Step size and count; dt is shrunk slightly so that ``n dt = T`` exactly."""
        return fit_steps(self.T, self.base_dt(op, mesh, material, k))


def fit_steps(T: float, dt: float) -> tuple[float, int]:
    n = max(1, math.ceil(T / dt - 1e-9))
    return T / n, n


def cfl_dt(h_K, c_p, k: int, cfl: float) -> float:
    return float(cfl * np.min(np.asarray(h_K) / (np.asarray(c_p) * k**2)))


def estimate_dt(mesh: Mesh, material: MaterialField, k: int, cfl: float) -> float:
    """Heuristic ``cfl * min_K h_K / (c_p k^2)`` with ``h_K`` the element diameter.

    This is a rule of thumb; ``spectral_dt`` gives the actual leapfrog limit.
    """
    return cfl_dt(mesh.h_K, material.wave_speed(), k, cfl)


def spectral_radius(op, tol: float = 1e-3, maxiter: int = 5000, seed: int = 0) -> float:
    """Largest eigenvalue of ``M^-1 K`` by power iteration in the M inner product."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.n_dofs)
    x /= math.sqrt(x @ op.apply_mass(x))
    lam_old = 0.0
    for it in range(maxiter):
        y = op.solve_mass(op.apply_stiffness(x))
        lam = float(x @ op.apply_mass(y))  # Rayleigh quotient x^T K x with x^T M x = 1
        nrm = math.sqrt(max(y @ op.apply_mass(y), 0.0))
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        # the Rayleigh quotient error is quadratic in the eigenvector error
        if it > 5 and abs(lam - lam_old) <= 0.1 * tol * abs(lam):
            return lam
        lam_old = lam
    raise RuntimeError(f"power iteration did not converge in {maxiter} iterations")


def spectral_dt(op, tol: float = 1e-3, maxiter: int = 5000, seed: int = 0) -> float:
    """Leapfrog stability limit ``2 / omega_max`` of the undamped system."""
    lam = spectral_radius(op, tol, maxiter, seed)
    return math.inf if lam <= 0 else 2.0 / math.sqrt(lam)


@dataclass
class LeapfrogState:
    u_prev: np.ndarray
    u_curr: np.ndarray
    n: int
    t: float


class Leapfrog:
    """Leapfrog stepper bound to one operator, load and step size."""

    def __init__(self, op, dt: float, load: Callable[[float], np.ndarray] | None = None,
                 damping: str = "centred", t0: float = 0.0):
        if damping not in DAMPING_SCHEMES:
            raise ValueError(f"unknown damping scheme {damping!r}")
        self.op, self.dt, self.load, self.t0 = op, float(dt), load, float(t0)
        self.C = getattr(op, "damping", None)
        self.scheme = damping
        self._lhs = None
        if self.C is not None and damping == "centred":
            M = sp.csc_matrix(op.mass)
            self._lhs = spla.splu((M + 0.5 * self.dt * self.C).tocsc())

    def force(self, t: float) -> np.ndarray | None:
        return None if self.load is None else self.load(t)

    def _residual(self, u, t):
        r = -self.op.apply_stiffness(u)
        F = self.force(t)
        return r if F is None else r + F

    def init(self, u0: np.ndarray, v0: np.ndarray) -> LeapfrogState:
        """Taylor start ``u1 = u0 + dt v0 + dt^2/2 M^-1 (F0 - K u0 - C v0)``."""
        dt = self.dt
        r = self._residual(u0, self.t0)
        if self.C is not None:
            r = r - self.C @ v0
        u1 = u0 + dt * v0 + 0.5 * dt**2 * self.op.solve_mass(r)
        return LeapfrogState(np.array(u0, dtype=float), u1, 1, self.t0 + dt)

    def step(self, s: LeapfrogState) -> LeapfrogState:
        dt = self.dt
        r = self._residual(s.u_curr, s.t)
        if self.C is None:
            u_next = 2.0 * s.u_curr - s.u_prev + dt**2 * self.op.solve_mass(r)
        elif self.scheme == "explicit":
            r = r - self.C @ (s.u_curr - s.u_prev) / dt
            u_next = 2.0 * s.u_curr - s.u_prev + dt**2 * self.op.solve_mass(r)
        else:
            M = self.op.apply_mass
            rhs = 2.0 * M(s.u_curr) - M(s.u_prev) + 0.5 * dt * (self.C @ s.u_prev) + dt**2 * r
            u_next = self._lhs.solve(rhs)
        return LeapfrogState(s.u_curr, u_next, s.n + 1, self.t0 + (s.n + 1) * dt)


def leapfrog_init(op, u0, v0, dt, load=None, damping="centred") -> LeapfrogState:
    return Leapfrog(op, dt, load, damping).init(u0, v0)


def leapfrog_step(op, state: LeapfrogState, dt, load=None, damping="centred") -> LeapfrogState:
    return Leapfrog(op, dt, load, damping).step(state)


@dataclass
class Sample:
    step: int
    t: float
    u: np.ndarray
    u_t: np.ndarray


@dataclass
class Trajectory:
    dt: float
    n_steps: int
    samples: list = field(default_factory=list)  # whatever the probe returned per report
    final: Sample | None = None
    blowup: BlowUpError | None = None

    @property
    def ok(self) -> bool:
        return self.blowup is None


def run_leapfrog(stepper: Leapfrog, u0, v0, n_steps: int, stride: int = 10,
                 probe: Callable[[Sample], object] | None = None,
                 blowup_check: Callable[[Sample], str | None] | None = None) -> Trajectory:
    """Advance ``n_steps`` steps, calling ``probe`` every ``stride`` steps and at the end.

    Velocities are centred differences, with one-sided second-order formulas at
    the first and last time levels.  Non-finite values (or a ``blowup_check``
    returning a reason) stop the run and are recorded with the step index.
    """
    dt = stepper.dt
    probe = probe or (lambda s: s)
    traj = Trajectory(dt, n_steps)
    u0 = np.asarray(u0, dtype=float)
    state = stepper.init(u0, np.asarray(v0, dtype=float))
    start = Sample(0, stepper.t0, u0, np.asarray(v0, dtype=float))

    def report(sample):
        if blowup_check is not None:
            reason = blowup_check(sample)
            if reason:
                raise BlowUpError(sample.step, sample.t, reason)
        traj.samples.append(probe(sample))

    try:
        report(start)
        if n_steps == 1:
            # trapezoidal velocity keeps second order with only two levels
            v = 2.0 * (state.u_curr - u0) / dt - start.u_t
            traj.final = Sample(1, state.t, state.u_curr, v)
            report(traj.final)
            return traj
        older = None
        while state.n < n_steps:
            nxt = stepper.step(state)
            if not np.all(np.isfinite(nxt.u_curr)):
                raise BlowUpError(nxt.n, nxt.t)
            if state.n % stride == 0:
                report(Sample(state.n, state.t, state.u_curr, (nxt.u_curr - state.u_prev) / (2 * dt)))
            older, state = state.u_prev, nxt
        v_end = (3.0 * state.u_curr - 4.0 * state.u_prev + older) / (2 * dt)
        traj.final = Sample(state.n, state.t, state.u_curr, v_end)
        report(traj.final)
    except BlowUpError as err:
        traj.blowup = err
    return traj

