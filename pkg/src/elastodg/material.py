"""Piecewise-constant isotropic materials: Hooke stiffness D and compliance A."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .mesh import FaceGroup, Mesh


def apply_stiffness(tau: np.ndarray, lam, mu) -> np.ndarray:
    """``D tau = 2 mu tau + lam tr(tau) I`` on the trailing ``(d, d)`` axes."""
    tau = np.asarray(tau)
    d = tau.shape[-1]
    lam = np.asarray(lam)[..., None, None]
    mu = np.asarray(mu)[..., None, None]
    tr = np.trace(tau, axis1=-2, axis2=-1)[..., None, None]
    return 2.0 * mu * tau + lam * tr * np.eye(d)


def apply_compliance(sigma: np.ndarray, lam, mu, d: int | None = None) -> np.ndarray:
    """``A sigma = (sigma - lam/(d lam + 2 mu) tr(sigma) I) / (2 mu)``.

    The denominator uses the space dimension so that ``A`` inverts ``D`` in 2D
    as well as 3D.
    """
    sigma = np.asarray(sigma)
    d = d or sigma.shape[-1]
    lam = np.asarray(lam)[..., None, None]
    mu = np.asarray(mu)[..., None, None]
    tr = np.trace(sigma, axis1=-2, axis2=-1)[..., None, None]
    return (sigma - lam / (d * lam + 2.0 * mu) * tr * np.eye(sigma.shape[-1])) / (2.0 * mu)


@dataclass(frozen=True)
class MaterialField:
    rho: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    dim: int

    def __post_init__(self):
        for name in ("rho", "lam", "mu"):
            arr = getattr(self, name)
            if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"material {name} must be strictly positive everywhere")

    @classmethod
    def uniform(cls, mesh: Mesh, rho=1.0, lam=1.0, mu=1.0) -> "MaterialField":
        n = mesh.n_elements
        return cls(np.full(n, float(rho)), np.full(n, float(lam)), np.full(n, float(mu)), mesh.dim)

    @classmethod
    def from_csv(cls, path, mesh: Mesh) -> "MaterialField":
        """Read ``element_id, rho, lambda, mu`` rows; every element must appear once."""
        n = mesh.n_elements
        vals = np.full((n, 3), np.nan)
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        if rows and not rows[0][0].strip().lstrip("-").isdigit():
            rows = rows[1:]
        for r in rows:
            e = int(r[0])
            if not 0 <= e < n:
                raise ValueError(f"{path}: element id {e} out of range")
            vals[e] = [float(v) for v in r[1:4]]
        missing = np.flatnonzero(np.isnan(vals[:, 0]))
        if missing.size:
            raise ValueError(f"{path}: no material for elements {missing[:10].tolist()}")
        return cls(vals[:, 0], vals[:, 1], vals[:, 2], mesh.dim)

    # -- bounds and scales --------------------------------------------------
    @property
    def rho_bounds(self):
        return float(self.rho.min()), float(self.rho.max())

    @property
    def D_bounds(self):
        return float(2 * self.mu.min()), float(np.max(self.dim * self.lam + 2 * self.mu))

    def element_scale(self, elements=None) -> np.ndarray:
        """Operator norm of D per element, ``d lam + 2 mu``."""
        s = self.dim * self.lam + 2.0 * self.mu
        return s if elements is None else s[elements]

    def group_scale(self, group: FaceGroup) -> np.ndarray:
        """Face scale: mean of the adjacent element scales, one-sided on the boundary."""
        if group.interior:
            p, m = group.elements
            return 0.5 * (self.element_scale(p) + self.element_scale(m))
        return self.element_scale(group.elements[0])

    def face_scale(self, mesh: Mesh, face_id: int) -> float:
        f = mesh.face(face_id)
        s = self.element_scale()
        return float(s[f.plus] if f.minus is None else 0.5 * (s[f.plus] + s[f.minus]))

    def wave_speed(self, elements=None) -> np.ndarray:
        c = np.sqrt((self.lam + 2.0 * self.mu) / self.rho)
        return c if elements is None else c[elements]


def scalar_stiffness_scale(lam, mu, d: int):
    return d * np.asarray(lam) + 2.0 * np.asarray(mu)


def wave_speed(rho, lam, mu):
    return np.sqrt((np.asarray(lam) + 2.0 * np.asarray(mu)) / np.asarray(rho))
