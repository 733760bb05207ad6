"""Interior penalty discretisation of the displacement formulation.

The bilinear form is

    a(w, v) = (D eps(w), eps(v))
              - <{D eps(w)}_delta, [[v]]>
              + theta <[[w]], {D eps(v)}_delta>
              + <S_F [[w]], [[v]]>

with face terms over interior and Dirichlet faces and
``S_F = c0 k^2 {D} / h_F``.  ``theta = -1`` gives SIP(delta), ``theta = 1``
NIP and ``theta = 0`` IIP.  The optional damping form
``<c_F [[u_t]], [[v]]>`` adds a velocity-jump penalty.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import BlockDiagInverse, Templates, scatter, side_pairs, side_weight
from .fem import DGSpace, load_vector
from .material import MaterialField
from .mesh import FaceKind
from .traces import check_weight

UNANALYSED_WARNING = (
    "theta={theta}: the non-symmetric NIP/IIP variants lie outside the analysed "
    "stability regime (only SIP, theta=-1, is covered)"
)


@dataclass(frozen=True)
class IpConfig:
    theta: int = -1
    delta: float = 0.5
    c0: float = 10.0
    c_F: float = 0.0

    def validate(self) -> list[str]:
        errors = []
        if self.theta not in (-1, 0, 1):
            errors.append(f"method.theta must be -1, 0 or 1, got {self.theta}")
        if not 0.0 <= self.delta <= 1.0:
            errors.append(f"method.delta must lie in [0, 1], got {self.delta}")
        elif self.theta != -1 and self.delta != 0.5:
            errors.append("method.delta != 0.5 is only defined for theta = -1 (SIP)")
        if not self.c0 > 0:
            errors.append(f"method.c0 must be > 0, got {self.c0}")
        if self.c_F < 0:
            errors.append(f"method.c_F must be >= 0, got {self.c_F}")
        return errors

    def warnings(self) -> list[str]:
        return [UNANALYSED_WARNING.format(theta=self.theta)] if self.theta != -1 else []


def penalty_value(h_F, k: int, face_scale, c0: float):
    """``S_F = c0 k^2 {D} / h_F``."""
    return c0 * k**2 * np.asarray(face_scale) / np.asarray(h_F)


def face_penalty(mesh, material: MaterialField, k: int, c0: float, face_id: int) -> float:
    f = mesh.face(face_id)
    if f.kind is FaceKind.NEUMANN:
        raise ValueError("the penalty S_F is not defined on Neumann faces")
    return float(penalty_value(f.h, k, material.face_scale(mesh, face_id), c0))


class IpOperator:
    """Assembled IP operators: stiffness ``A``, damping ``C`` (if ``c_F > 0``) and mass ``M``.

    ``volume`` and ``jumps`` are kept separately for the energy norms:
    ``jumps`` is ``sum_F {D}/h_F <[[u]], [[v]]>``, so the penalty matrix is
    ``c0 k^2 jumps``.
    """

    def __init__(self, space: DGSpace, material: MaterialField, cfg: IpConfig):
        errors = cfg.validate()
        if errors:
            raise ValueError("; ".join(errors))
        for msg in cfg.warnings():
            warnings.warn(msg, stacklevel=2)
        self.space, self.material, self.cfg = space, material, cfg
        k = space.degree
        tpl = Templates(space)
        self.templates = tpl
        n, nb = space.n_dofs, space.vec_block
        shape, blocks = (n, n), (nb, nb)
        elems = np.arange(space.n_el)
        mat = material

        mass_blocks = mat.rho[:, None, None] * tpl.mass[None]
        self.mass = scatter(elems, elems, mat.rho, tpl.mass, shape, blocks)
        self.mass_inv = BlockDiagInverse(mass_blocks)
        self.volume = scatter(elems, elems, mat.mu, tpl.k_mu, shape, blocks) + scatter(
            elems, elems, mat.lam, tpl.k_lam, shape, blocks
        )

        cons = sp.csr_matrix(shape)
        jumps = sp.csr_matrix(shape)
        delta = check_weight(cfg.delta)
        for grp in space.mesh.groups(FaceKind.INTERIOR, FaceKind.DIRICHLET):
            scale = mat.group_scale(grp)
            h_F = space.mesh.h_F[grp.ids]
            for rh, ch, re, ce, _, cs in side_pairs(grp):
                w = side_weight(cs, delta)
                cons = cons + scatter(re, ce, w * mat.mu[ce], tpl.face(grp.axis, rh, ch, "cons_mu"), shape, blocks)
                cons = cons + scatter(re, ce, w * mat.lam[ce], tpl.face(grp.axis, rh, ch, "cons_lam"), shape, blocks)
                jumps = jumps + scatter(re, ce, scale / h_F, tpl.face(grp.axis, rh, ch, "pen"), shape, blocks)
        self.consistency = cons.tocsr()
        self.jumps = jumps.tocsr()
        self.penalty = (cfg.c0 * k**2) * self.jumps
        self.A = (self.volume - self.consistency + cfg.theta * self.consistency.T + self.penalty).tocsr()
        self.C = (cfg.c_F * self.jumps_unscaled()) if cfg.c_F > 0 else None

    def jumps_unscaled(self) -> sp.csr_matrix:
        """``sum_F <[[u]], [[v]]>`` over interior and Dirichlet faces (no weights)."""
        if not hasattr(self, "_jumps_unit"):
            space, tpl = self.space, self.templates
            n, nb = space.n_dofs, space.vec_block
            J = sp.csr_matrix((n, n))
            for grp in space.mesh.groups(FaceKind.INTERIOR, FaceKind.DIRICHLET):
                for rh, ch, re, ce, _, _ in side_pairs(grp):
                    J = J + scatter(re, ce, 1.0, tpl.face(grp.axis, rh, ch, "pen"), (n, n), (nb, nb))
            self._jumps_unit = J.tocsr()
        return self._jumps_unit

    # -- the semi-discrete system interface used by the time stepper ---------
    @property
    def n_dofs(self) -> int:
        return self.space.n_dofs

    def apply_stiffness(self, u: np.ndarray) -> np.ndarray:
        return self.A @ u

    def apply_mass(self, u: np.ndarray) -> np.ndarray:
        return self.mass @ u

    def solve_mass(self, r: np.ndarray) -> np.ndarray:
        return self.mass_inv(r)

    @property
    def damping(self):
        return self.C

    def bilinear(self, w: np.ndarray, v: np.ndarray) -> float:
        """``a(w, v)``."""
        return float(v @ (self.A @ w))

    def energy_seminorm_sq(self, u: np.ndarray) -> float:
        """``||D^1/2 eps(u)||^2 + ||S_F^1/2 [[u]]||^2``."""
        return float(u @ (self.volume @ u) + u @ (self.penalty @ u))


def assemble_ip(space: DGSpace, material: MaterialField, cfg: IpConfig | None = None) -> IpOperator:
    return IpOperator(space, material, cfg or IpConfig())


def assemble_ip_rhs(space: DGSpace, f=None, g=None, t: float = 0.0) -> np.ndarray:
    """``(f, v) + <g, v>_{F^N}``; Dirichlet data is zero so no lifting enters."""
    return load_vector(space, f, g, t)


def coercivity_probe(op: IpOperator, samples: int = 64, seed: int = 0, subspace=None) -> float:
    """Smallest sampled ``a(v, v) / (||D^1/2 eps(v)||^2 + ||S_F^1/2 [[v]]||^2)``.

    ``subspace`` optionally maps a random coefficient vector into the trial
    space (e.g. a projection onto continuous fields).
    """
    if op.cfg.theta != -1:
        raise ValueError("the coercivity probe is defined for theta = -1")
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(samples):
        v = rng.standard_normal(op.n_dofs)
        if subspace is not None:
            v = subspace(v)
        denom = op.energy_seminorm_sq(v)
        if denom <= 0:
            continue
        best = min(best, op.bilinear(v, v) / denom)
    return float(best)


def coercivity_constant(op: IpOperator) -> float:
    """Exact minimum of the same Rayleigh quotient via a dense generalised eigen-solve."""
    from scipy.linalg import eigh

    A = op.A.toarray()
    N = (op.volume + op.penalty).toarray()
    vals = eigh(0.5 * (A + A.T), N, eigvals_only=True)
    return float(vals.min())
