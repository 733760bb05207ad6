"""Manufactured solutions and initial data on the unit box.

Each displacement component is ``sin(3 pi t)`` times a product of 1-D factors
``S(s) = sin(2 pi s)`` and ``Q(s) = sin^2(pi s)``:

    3D:  u = sin(3 pi t) (-Q S S,  S Q S,  S S Q)
    2D:  u = sin(3 pi t) (-Q S,    S Q)

Derivatives are taken factor by factor with the closed-form 1-D derivatives,
which gives the forcing ``f = rho u_tt - div(D eps(u))`` without symbolic
machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .material import apply_stiffness

PI = np.pi
OMEGA = 3.0 * PI  # temporal frequency


def _S(s, order):
    a = 2.0 * PI
    return (np.sin(a * s), a * np.cos(a * s), -(a**2) * np.sin(a * s))[order]


def _Q(s, order):
    # sin^2(pi s), pi sin(2 pi s), 2 pi^2 cos(2 pi s)
    return (np.sin(PI * s) ** 2, PI * np.sin(2 * PI * s), 2 * PI**2 * np.cos(2 * PI * s))[order]


_FACTORS = {"S": _S, "Q": _Q}

PATTERNS = {
    2: ((-1.0, "QS"), (1.0, "SQ")),
    3: ((-1.0, "QSS"), (1.0, "SQS"), (1.0, "SSQ")),
}


def _component(x, sign, letters, orders):
    out = sign * np.ones(x.shape[:-1])
    for j, (c, o) in enumerate(zip(letters, orders)):
        out = out * _FACTORS[c](x[..., j], o)
    return out


def spatial_pattern(x: np.ndarray) -> np.ndarray:
    """``U(x)``, shape ``(..., d)``."""
    d = x.shape[-1]
    return np.stack([_component(x, s, p, (0,) * d) for s, p in PATTERNS[d]], axis=-1)


def spatial_gradient(x: np.ndarray) -> np.ndarray:
    """``grad U`` with ``[..., i, j] = dU_i/dx_j``."""
    d = x.shape[-1]
    rows = []
    for s, p in PATTERNS[d]:
        rows.append(np.stack([_component(x, s, p, tuple(int(m == j) for m in range(d))) for j in range(d)], -1))
    return np.stack(rows, axis=-2)


def spatial_hessian(x: np.ndarray) -> np.ndarray:
    """``[..., i, j, l] = d^2 U_i / dx_j dx_l``."""
    d = x.shape[-1]
    out = np.empty(x.shape[:-1] + (d, d, d))
    for i, (s, p) in enumerate(PATTERNS[d]):
        for j in range(d):
            for l in range(d):
                orders = [0] * d
                orders[j] += 1
                orders[l] += 1
                out[..., i, j, l] = _component(x, s, p, tuple(orders))
    return out


@dataclass
class ExactSolution:
    """``u(x, t) = sin(3 pi t) U(x)`` for constant ``rho, lam, mu``."""

    dim: int
    rho: float = 1.0
    lam: float = 1.0
    mu: float = 1.0
    omega: float = OMEGA

    def time_factor(self, t, order=0):
        w = self.omega
        return (np.sin(w * t), w * np.cos(w * t), -(w**2) * np.sin(w * t))[order]

    def u(self, x, t):
        return self.time_factor(t) * spatial_pattern(x)

    def u_t(self, x, t):
        return self.time_factor(t, 1) * spatial_pattern(x)

    def u_tt(self, x, t):
        return self.time_factor(t, 2) * spatial_pattern(x)

    def grad(self, x, t):
        return self.time_factor(t) * spatial_gradient(x)

    def strain(self, x, t):
        g = self.grad(x, t)
        return 0.5 * (g + np.swapaxes(g, -1, -2))

    def stress(self, x, t):
        return apply_stiffness(self.strain(x, t), self.lam, self.mu)

    def div_stress(self, x, t):
        H = self.time_factor(t) * spatial_hessian(x)
        lap = np.einsum("...ijj->...i", H)
        grad_div = np.einsum("...jji->...i", H)
        return self.mu * lap + (self.lam + self.mu) * grad_div

    def forcing(self, x, t):
        return self.rho * self.u_tt(x, t) - self.div_stress(x, t)

    def forcing_profile(self, x):
        """Spatial part ``F(x)`` of ``f(x, t) = sin(omega t) F(x)``."""
        return -self.rho * self.omega**2 * spatial_pattern(x) - self.div_stress(x, np.pi / (2 * self.omega))

    # aliases matching the eval_* operation names
    def eval_exact(self, x, t):
        return self.u(x, t), self.u_t(x, t)

    def eval_forcing(self, x, t):
        return self.forcing(x, t)


@dataclass
class Problem:
    """Initial data, loads and (optionally) the exact solution of a run."""

    name: str
    dim: int
    u0: Callable
    v0: Callable
    forcing: Callable | None = None
    traction: Callable | None = None
    exact: ExactSolution | None = None
    # optional (time_factor, profile) with forcing(x, t) = time_factor(t) * profile(x)
    forcing_split: tuple | None = None
    material: dict = field(default_factory=lambda: dict(rho=1.0, lam=1.0, mu=1.0))


def _zero(x):
    return np.zeros(x.shape)


def paper_problem(dim: int, rho=1.0, lam=1.0, mu=1.0) -> Problem:
    ex = ExactSolution(dim, rho, lam, mu)
    return Problem(
        name=f"paper{dim}d",
        dim=dim,
        u0=lambda x: ex.u(x, 0.0),
        v0=lambda x: ex.u_t(x, 0.0),
        forcing=ex.forcing,
        exact=ex,
        forcing_split=(ex.time_factor, ex.forcing_profile),
        material=dict(rho=rho, lam=lam, mu=mu),
    )


def conservation_problem(dim: int, rho=1.0, lam=1.0, mu=1.0) -> Problem:
    """Unloaded body, ``u0 = 0`` and ``v0 = 3 pi U(x)``."""
    return Problem(
        name=f"conservation{dim}d",
        dim=dim,
        u0=_zero,
        v0=lambda x: OMEGA * spatial_pattern(x),
        material=dict(rho=rho, lam=lam, mu=mu),
    )


def zero_problem(dim: int) -> Problem:
    return Problem(name=f"zero{dim}d", dim=dim, u0=_zero, v0=_zero)


PROBLEMS = {
    "paper3d": lambda **kw: paper_problem(3, **kw),
    "paper2d": lambda **kw: paper_problem(2, **kw),
    "conservation3d": lambda **kw: conservation_problem(3, **kw),
    "conservation2d": lambda **kw: conservation_problem(2, **kw),
    "zero2d": lambda **kw: zero_problem(2),
    "zero3d": lambda **kw: zero_problem(3),
}


def get_problem(name: str, **material) -> Problem:
    try:
        return PROBLEMS[name](**material)
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; available: {sorted(PROBLEMS)}") from None
