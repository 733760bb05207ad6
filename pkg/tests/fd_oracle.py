"""Sixth-order finite differences of the exact displacement, used as an independent forcing check."""

import numpy as np

D1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
OFFSETS = np.arange(-3, 4)


def d1_space(f, x, axis, h):
    e = np.zeros(x.shape[-1])
    e[axis] = h
    return sum(c * f(x + o * e) for c, o in zip(D1, OFFSETS) if c) / h


def d2_time(f, t, h):
    return sum(c * f(t + o * h) for c, o in zip(D2, OFFSETS)) / h**2


def fd_forcing(ex, x, t, h=1e-3):
    """``rho u_tt - div(D eps(u))`` using only ``ex.u``."""
    d = x.shape[-1]

    def stress(y):
        g = np.stack([d1_space(lambda z: ex.u(z, t), y, j, h) for j in range(d)], -1)  # [..., i, j]
        eps = 0.5 * (g + np.swapaxes(g, -1, -2))
        tr = np.trace(eps, axis1=-2, axis2=-1)
        return 2 * ex.mu * eps + ex.lam * tr[..., None, None] * np.eye(d)

    div = sum(d1_space(lambda y: stress(y)[..., :, j], x, j, h) for j in range(d))
    return ex.rho * d2_time(lambda s: ex.u(x, s), t, h) - div
