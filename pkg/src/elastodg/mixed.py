"""Displacement-stress DG methods (FDG, LDG, ALT).

With ``b(tau, v) = (tau, eps(v)) - <{tau}_delta, [[v]]>_{F^o u F^D}`` the
semi-discrete system reads

    M u_tt + G s + C11 u = F
    S s = G^T u + g_sigma,      S = M_A + C22

where ``G`` is the matrix of ``b``, ``M_A`` the compliance mass, ``C11`` the
displacement-jump penalty (interior and Dirichlet faces), ``C22`` the stress
jump penalty (interior faces and ``sigma n`` on Neumann faces) and
``g_sigma = <c22 g, tau n>_{F^N}``.  The stress equation has no time
derivative, so sigma is recovered from u every step and the time stepper only
sees ``K = G S^-1 G^T + C11``.  The transpose structure follows from the
weighted-average cancellation identity and makes K symmetric positive
semidefinite.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import BlockDiagInverse, Templates, block_diagonal, scatter, side_pairs, side_weight
from .fem import DGSpace, load_vector
from .material import MaterialField
from .mesh import FaceKind
from .traces import check_weight

ALT_NEUMANN_WARNING = (
    "ALT fluxes with Neumann faces: stability is only guaranteed for pure Dirichlet "
    "boundary conditions"
)


class Method(str, enum.Enum):
    FDG = "FDG"
    LDG = "LDG"
    ALT = "ALT"


@dataclass(frozen=True)
class MixedConfig:
    method: Method = Method.LDG
    delta: float = 0.5
    c1: float = 1.0
    c2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(str(self.method).upper().split(".")[-1]))

    def validate(self) -> list[str]:
        errors = []
        if not 0.0 <= self.delta <= 1.0:
            errors.append(f"method.delta must lie in [0, 1], got {self.delta}")
        if self.c1 < 0 or self.c2 < 0:
            errors.append("method.c1 and method.c2 must be >= 0")
        if self.method is Method.ALT and self.delta not in (0.0, 1.0):
            errors.append(f"ALT requires method.delta in {{0, 1}}, got {self.delta}")
        return errors

    @property
    def c1_eff(self) -> float:
        return 0.0 if self.method is Method.ALT else float(self.c1)

    @property
    def c2_eff(self) -> float:
        return float(self.c2) if self.method is Method.FDG else 0.0


def flux_parameters(h_F, k: int, face_scale, cfg: MixedConfig):
    """``c11 = c1 k^2 {D} / h_F`` and ``c22 = c2 h_F / (k^2 {D})`` with method forcing."""
    h_F, face_scale = np.asarray(h_F, float), np.asarray(face_scale, float)
    c11 = cfg.c1_eff * k**2 * face_scale / h_F
    c22 = cfg.c2_eff * h_F / (k**2 * face_scale)
    return c11, c22


class SigmaSolver:
    """Solve ``S s = r``: element-local for ``c2 = 0``, preconditioned CG otherwise."""

    def __init__(self, S: sp.csr_matrix, blocks: np.ndarray, local: bool, rtol: float = 1e-12):
        self.S = S
        self.local = local
        self.block_inv = BlockDiagInverse(blocks)
        self.rtol = rtol
        self.iterations = 0

    def __call__(self, r: np.ndarray, x0: np.ndarray | None = None) -> np.ndarray:
        if self.local:
            return self.block_inv(r)
        n = self.S.shape[0]
        M = spla.LinearOperator((n, n), matvec=self.block_inv, dtype=float)
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = spla.cg(self.S, r, x0=x0, rtol=self.rtol, atol=0.0, M=M, maxiter=10 * n, callback=cb)
        self.iterations += count[0]
        if info != 0:
            raise RuntimeError(f"stress solve did not converge (info={info})")
        return x


class MixedOperator:
    def __init__(self, space: DGSpace, material: MaterialField, cfg: MixedConfig, rtol: float = 1e-12):
        errors = cfg.validate()
        if errors:
            raise ValueError("; ".join(errors))
        mesh = space.mesh
        self.has_neumann = bool(np.any(mesh.face_kind == FaceKind.NEUMANN))
        if cfg.method is Method.ALT and self.has_neumann:
            warnings.warn(ALT_NEUMANN_WARNING, stacklevel=2)
        self.space, self.material, self.cfg = space, material, cfg
        k, d = space.degree, space.dim
        tpl = Templates(space)
        self.templates = tpl
        nu, ns = space.n_dofs, space.n_sigma_dofs
        bu, bs = space.vec_block, space.ten_block
        elems = np.arange(space.n_el)
        mat = material
        delta = check_weight(cfg.delta)

        self.mass = scatter(elems, elems, mat.rho, tpl.mass, (nu, nu), (bu, bu))
        self.mass_inv = BlockDiagInverse(mat.rho[:, None, None] * tpl.mass[None])

        inv2mu = 1.0 / (2.0 * mat.mu)
        trc = mat.lam / (d * mat.lam + 2.0 * mat.mu)
        ma_blocks = inv2mu[:, None, None] * (tpl.m_sig[None] - trc[:, None, None] * tpl.m_tr[None])
        self.compliance_mass = block_diagonal(ma_blocks)

        G = scatter(elems, elems, 1.0, tpl.g_vol, (nu, ns), (bu, bs))
        C11 = sp.csr_matrix((nu, nu))
        C22 = sp.csr_matrix((ns, ns))
        for grp in mesh.groups(FaceKind.INTERIOR, FaceKind.DIRICHLET):
            c11, _ = flux_parameters(mesh.h_F[grp.ids], k, mat.group_scale(grp), cfg)
            for rh, ch, re, ce, _, cs in side_pairs(grp):
                w = side_weight(cs, delta)
                G = G - scatter(re, ce, w, tpl.face(grp.axis, rh, ch, "g"), (nu, ns), (bu, bs))
                if cfg.c1_eff > 0:
                    C11 = C11 + scatter(re, ce, c11, tpl.face(grp.axis, rh, ch, "pen"), (nu, nu), (bu, bu))
        self._neumann_c22 = []
        if cfg.c2_eff > 0:
            for grp in mesh.groups(FaceKind.INTERIOR, FaceKind.NEUMANN):
                _, c22 = flux_parameters(mesh.h_F[grp.ids], k, mat.group_scale(grp), cfg)
                if grp.kind is FaceKind.NEUMANN:
                    self._neumann_c22.append((grp, c22))
                for rh, ch, re, ce, _, _ in side_pairs(grp):
                    C22 = C22 + scatter(re, ce, c22, tpl.face(grp.axis, rh, ch, "jsig"), (ns, ns), (bs, bs))
        self.G = G.tocsr()
        self.GT = self.G.T.tocsr()
        self.C11 = C11.tocsr()
        self.C22 = C22.tocsr()
        self.S = (self.compliance_mass + self.C22).tocsr()
        local = cfg.c2_eff == 0
        self.sigma_solver = SigmaSolver(self.S, ma_blocks if local else _diag_blocks(self.S, space), local, rtol)
        self._last_sigma = None
        self._K = None
        if local:
            # K is an explicit sparse matrix when the stress solve is element-local
            self._K = (self.G @ self.sigma_solver.block_inv.matrix() @ self.GT + self.C11).tocsr()

    # -- stress recovery and momentum action ---------------------------------
    def traction_sigma_load(self, g, t: float) -> np.ndarray:
        """``<c22 g, tau n>_{F^N}``; zero unless FDG with Neumann faces."""
        space = self.space
        out = np.zeros((space.n_el, space.ten_block))
        if g is None or not self._neumann_c22:
            return out.ravel()
        for grp, c22 in self._neumann_c22:
            side = self.templates.side(grp.axis, grp.high)
            (e,) = grp.elements
            tab = space.side_table(grp.axis, grp.high)
            x = space.physical_points(e, tab.points)
            gx = np.asarray(g(x, t))
            vals = np.einsum("fqa,q,qja->fj", gx, side["w"], side["Tn"])
            np.add.at(out, e, c22[:, None] * vals)
        return out.ravel()

    def recover_sigma(self, u: np.ndarray, g=None, t: float = 0.0) -> np.ndarray:
        rhs = self.GT @ u
        if g is not None:
            rhs = rhs + self.traction_sigma_load(g, t)
        s = self.sigma_solver(rhs, self._last_sigma)
        self._last_sigma = s
        return s

    def momentum_apply(self, u: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """Load-free left side of the momentum equation: ``G s + C11 u``."""
        return self.G @ sigma + self.C11 @ u

    # -- time stepper interface ----------------------------------------------
    @property
    def n_dofs(self) -> int:
        return self.space.n_dofs

    @property
    def K(self):
        """Composed displacement operator (sparse for local solves, otherwise a LinearOperator)."""
        if self._K is not None:
            return self._K
        n = self.n_dofs
        return spla.LinearOperator((n, n), matvec=self.apply_stiffness, dtype=float)

    def apply_stiffness(self, u: np.ndarray) -> np.ndarray:
        if self._K is not None:
            return self._K @ u
        return self.momentum_apply(u, self.recover_sigma(u))

    def apply_mass(self, u):
        return self.mass @ u

    def solve_mass(self, r):
        return self.mass_inv(r)

    damping = None

    def dense_stiffness(self) -> np.ndarray:
        """Column-by-column composed operator (small meshes only)."""
        n = self.n_dofs
        out = np.empty((n, n))
        e = np.zeros(n)
        for j in range(n):
            e[j] = 1.0
            out[:, j] = self.apply_stiffness(e)
            e[j] = 0.0
        return out

    # -- energy pieces --------------------------------------------------------
    def energy_terms(self, u, u_t, sigma) -> dict:
        return {
            "kinetic": float(u_t @ (self.mass @ u_t)),
            "stress": float(sigma @ (self.compliance_mass @ sigma)),
            "u_jump": float(u @ (self.C11 @ u)),
            "sigma_jump": float(sigma @ (self.C22 @ sigma)),
        }


def _diag_blocks(S: sp.csr_matrix, space: DGSpace) -> np.ndarray:
    nb = space.ten_block
    out = np.empty((space.n_el, nb, nb))
    for e in range(space.n_el):
        sl = slice(e * nb, (e + 1) * nb)
        out[e] = S[sl, sl].toarray()
    return out


def assemble_mixed(space: DGSpace, material: MaterialField, cfg: MixedConfig | None = None) -> MixedOperator:
    return MixedOperator(space, material, cfg or MixedConfig())


def mixed_rhs(space: DGSpace, f=None, g=None, t: float = 0.0) -> np.ndarray:
    """Momentum load ``(f, v) + <g, v>_{F^N}``."""
    return load_vector(space, f, g, t)


def discrete_energy_mdg(op: MixedOperator, u, u_t, sigma) -> float:
    """Squared discrete energy ``||rho^1/2 u_t||^2 + ||A^1/2 sigma||^2 + jump penalties``."""
    return float(sum(op.energy_terms(u, u_t, sigma).values()))
