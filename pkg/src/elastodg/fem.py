"""Reference-cell bases, quadrature, and the broken spaces V_h and Sigma_h.

The scalar basis is the tensor product of 1-D Lagrange polynomials through the
Gauss-Lobatto nodes on [0, 1].  Scalar index ``a = i0 + (k+1) i1 + (k+1)^2 i2``
(x fastest).

Coefficient layouts
-------------------
* vector field (DGVector):  ``u.reshape(n_el, d, n_scalar)``
* symmetric tensor (DGTensorField): ``s.reshape(n_el, n_sym, n_scalar)`` where
  the components are ordered ``11, 22, (33), 12, (13, 23)``.  Component ``c``
  multiplies the symmetric unit tensor ``E_c`` (``E_12 = e1 e2^T + e2 e1^T``),
  so the stored off-diagonal coefficient *is* ``sigma_12``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import legendre

from .mesh import FaceGroup, Mesh

MAX_DEGREE = 8


def gauss_legendre(n: int):
    """``n``-point Gauss-Legendre rule on [0, 1]."""
    x, w = legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def gauss_lobatto_nodes(n: int) -> np.ndarray:
    """``n`` Gauss-Lobatto nodes on [0, 1] (endpoints included)."""
    if n < 2:
        raise ValueError("Gauss-Lobatto needs at least two nodes")
    interior = legendre.Legendre.basis(n - 1).deriv().roots()
    x = np.concatenate(([-1.0], np.sort(interior.real), [1.0]))
    return 0.5 * (x + 1.0)


def lagrange_1d(nodes: np.ndarray, x: np.ndarray):
    """Values and derivatives of the Lagrange polynomials through ``nodes``.

    Returns arrays of shape ``(len(x), len(nodes))``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(nodes)
    diff = x[:, None] - nodes[None, :]
    denom = np.array([np.prod([nodes[i] - nodes[j] for j in range(n) if j != i]) for i in range(n)])
    val = np.empty((len(x), n))
    der = np.zeros((len(x), n))
    for i in range(n):
        others = [j for j in range(n) if j != i]
        val[:, i] = np.prod(diff[:, others], axis=1) / denom[i]
        for m in others:
            rest = [j for j in others if j != m]
            der[:, i] += np.prod(diff[:, rest], axis=1) / denom[i]
    return val, der


@dataclass(frozen=True)
class Basis:
    degree: int
    dim: int

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in [1, {MAX_DEGREE}], got {self.degree}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")

    @cached_property
    def nodes1d(self) -> np.ndarray:
        return gauss_lobatto_nodes(self.degree + 1)

    @property
    def n_scalar(self) -> int:
        return (self.degree + 1) ** self.dim

    @cached_property
    def nodes(self) -> np.ndarray:
        """Reference nodes, shape ``(n_scalar, dim)``, in basis order."""
        grids = np.meshgrid(*([self.nodes1d] * self.dim), indexing="ij")
        # x fastest: index a = i0 + (k+1) i1 + ...
        return np.stack([g.transpose(*range(self.dim)[::-1]).ravel() for g in grids], axis=-1)

    def eval(self, xref: np.ndarray) -> np.ndarray:
        """Scalar basis values at reference points, shape ``(npts, n_scalar)``."""
        return self.tabulate(xref)[0]

    def tabulate(self, xref: np.ndarray):
        """Values ``(npts, ns)`` and reference gradients ``(npts, ns, dim)``."""
        xref = np.atleast_2d(np.asarray(xref, dtype=float))
        d = self.dim
        tabs = [lagrange_1d(self.nodes1d, xref[:, j]) for j in range(d)]
        npts, n1 = xref.shape[0], self.degree + 1

        def outer(factors):
            # factors[j]: (npts, n1); returns (npts, ns) with x fastest
            out = factors[d - 1]
            for j in range(d - 2, -1, -1):
                out = (out[:, :, None] * factors[j][:, None, :]).reshape(npts, -1)
            return out

        val = outer([t[0] for t in tabs])
        grad = np.empty((npts, n1**d, d))
        for j in range(d):
            grad[:, :, j] = outer([tabs[m][1] if m == j else tabs[m][0] for m in range(d)])
        return val, grad


def make_basis(k: int, d: int) -> Basis:
    return Basis(k, d)


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, dim_entity) on [0,1]^dim_entity
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.weights)


def tensor_rule(n1: int, dim: int) -> QuadratureRule:
    x, w = gauss_legendre(n1)
    if dim == 0:
        return QuadratureRule(np.zeros((1, 0)), np.ones(1))
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    pts = np.stack([g.transpose(*range(dim)[::-1]).ravel() for g in grids], axis=-1)
    wts = np.prod([g.transpose(*range(dim)[::-1]).ravel() for g in wgrids], axis=0)
    return QuadratureRule(pts, wts)


def make_quadrature(k: int, entity: str, d: int, points_per_axis: int | None = None) -> QuadratureRule:
    """Gauss-Legendre rule with ``k+1`` points per direction (exact to 2k+1)."""
    n1 = points_per_axis or (k + 1)
    if entity == "cell":
        return tensor_rule(n1, d)
    if entity == "face":
        return tensor_rule(n1, d - 1)
    raise ValueError(f"entity must be 'cell' or 'face', got {entity!r}")


def sym_components(d: int):
    """Index pairs of the stored symmetric-tensor components."""
    if d == 2:
        return [(0, 0), (1, 1), (0, 1)]
    return [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]


def sym_unit_tensors(d: int) -> np.ndarray:
    """``E_c`` for each symmetric component, shape ``(n_sym, d, d)``."""
    comps = sym_components(d)
    E = np.zeros((len(comps), d, d))
    for c, (i, j) in enumerate(comps):
        E[c, i, j] = 1.0
        E[c, j, i] = 1.0
    return E


def sym_to_full(s: np.ndarray, d: int) -> np.ndarray:
    """Stored components ``(..., n_sym)`` to full tensors ``(..., d, d)``."""
    return np.einsum("...c,cij->...ij", s, sym_unit_tensors(d))


def full_to_sym(t: np.ndarray, d: int) -> np.ndarray:
    return np.stack([t[..., i, j] for i, j in sym_components(d)], axis=-1)


def face_reference_points(axis: int, high: bool, face_pts: np.ndarray, d: int) -> np.ndarray:
    """Embed face rule points into the reference cell on the given side."""
    pts = np.empty((face_pts.shape[0], d))
    tangential = [b for b in range(d) if b != axis]
    pts[:, axis] = 1.0 if high else 0.0
    for j, b in enumerate(tangential):
        pts[:, b] = face_pts[:, j]
    return pts


@dataclass
class SideTable:
    """Basis traces on one reference side, with physical gradients."""

    values: np.ndarray  # (nq, ns)
    grads: np.ndarray  # (nq, ns, d), physical
    weights: np.ndarray  # (nq,), includes the face Jacobian
    points: np.ndarray  # (nq, d) reference coordinates


class DGSpace:
    """Broken spaces V_h (vector) and Sigma_h (symmetric tensor) on a mesh."""

    def __init__(self, mesh: Mesh, degree: int):
        self.mesh = mesh
        self.dim = mesh.dim
        self.basis = Basis(degree, mesh.dim)
        self.degree = degree
        self.ns = self.basis.n_scalar
        self.n_sym = self.dim * (self.dim + 1) // 2
        self.n_el = mesh.n_elements
        self.vec_block = self.dim * self.ns
        self.ten_block = self.n_sym * self.ns
        self.n_dofs = self.n_el * self.vec_block
        self.n_sigma_dofs = self.n_el * self.ten_block
        self._tables = {}

    def __repr__(self):
        return f"DGSpace(k={self.degree}, {self.mesh.summary()}, dofs={self.n_dofs})"

    # -- layouts ------------------------------------------------------------
    def vec(self, u) -> np.ndarray:
        return np.asarray(u).reshape(self.n_el, self.dim, self.ns)

    def ten(self, s) -> np.ndarray:
        return np.asarray(s).reshape(self.n_el, self.n_sym, self.ns)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n_dofs)

    def zeros_sigma(self) -> np.ndarray:
        return np.zeros(self.n_sigma_dofs)

    # -- reference tables ---------------------------------------------------
    def volume_table(self, n1: int | None = None) -> SideTable:
        n1 = n1 or self.degree + 1
        key = ("vol", n1)
        if key not in self._tables:
            rule = make_quadrature(self.degree, "cell", self.dim, n1)
            val, grad = self.basis.tabulate(rule.points)
            grad = grad / self.mesh.spacing
            w = rule.weights * self.mesh.element_measure()
            self._tables[key] = SideTable(val, grad, w, rule.points)
        return self._tables[key]

    def side_table(self, axis: int, high: bool, n1: int | None = None) -> SideTable:
        n1 = n1 or self.degree + 1
        key = ("face", axis, high, n1)
        if key not in self._tables:
            rule = make_quadrature(self.degree, "face", self.dim, n1)
            pts = face_reference_points(axis, high, rule.points, self.dim)
            val, grad = self.basis.tabulate(pts)
            grad = grad / self.mesh.spacing
            w = rule.weights * self.mesh.face_measure(axis)
            self._tables[key] = SideTable(val, grad, w, pts)
        return self._tables[key]

    def physical_points(self, elements: np.ndarray, ref_pts: np.ndarray) -> np.ndarray:
        """Map reference points into the given elements: ``(n, nq, d)``."""
        m = self.mesh
        return m.origins[elements][:, None, :] + ref_pts[None, :, :] * m.spacing

    # -- pointwise evaluation -------------------------------------------------
    def eval_vector(self, u, table: SideTable, elements=None) -> np.ndarray:
        U = self.vec(u) if elements is None else self.vec(u)[elements]
        return np.einsum("eca,qa->eqc", U, table.values)

    def eval_gradient(self, u, table: SideTable, elements=None) -> np.ndarray:
        """``grad u`` with ``[..., i, j] = d u_i / d x_j``."""
        U = self.vec(u) if elements is None else self.vec(u)[elements]
        return np.einsum("eca,qaj->eqcj", U, table.grads)

    def eval_strain(self, u, table: SideTable, elements=None) -> np.ndarray:
        g = self.eval_gradient(u, table, elements)
        return 0.5 * (g + np.swapaxes(g, -1, -2))

    def eval_tensor(self, s, table: SideTable, elements=None) -> np.ndarray:
        S = self.ten(s) if elements is None else self.ten(s)[elements]
        comps = np.einsum("eca,qa->eqc", S, table.values)
        return sym_to_full(comps, self.dim)

    # -- projections ----------------------------------------------------------
    def interpolate(self, func, t: float | None = None) -> np.ndarray:
        """Nodal interpolant at the Gauss-Lobatto nodes of every element."""
        x = self.physical_points(np.arange(self.n_el), self.basis.nodes)
        vals = func(x) if t is None else func(x, t)
        vals = np.asarray(vals).reshape(self.n_el, self.ns, self.dim)
        return np.ascontiguousarray(np.swapaxes(vals, 1, 2)).ravel()

    def interpolate_tensor(self, func, t: float | None = None) -> np.ndarray:
        x = self.physical_points(np.arange(self.n_el), self.basis.nodes)
        vals = func(x) if t is None else func(x, t)
        comps = full_to_sym(np.asarray(vals), self.dim)  # (n_el, ns, n_sym)
        return np.ascontiguousarray(np.swapaxes(comps, 1, 2)).ravel()

    def face_tables(self, group: FaceGroup, n1: int | None = None):
        """Side tables for a face group: ``(plus, minus)`` or ``(single,)``."""
        if group.interior:
            return (
                self.side_table(group.axis, True, n1),
                self.side_table(group.axis, False, n1),
            )
        return (self.side_table(group.axis, group.high, n1),)


def element_mass_matrix(space: DGSpace, rho: float) -> np.ndarray:
    """Vector mass matrix of one element: ``kron(I_d, rho * M_scalar)``."""
    tab = space.volume_table()
    ms = np.einsum("q,qa,qb->ab", tab.weights, tab.values, tab.values)
    return np.kron(np.eye(space.dim), rho * ms)


def tabulate_strain(space: DGSpace, coeffs: np.ndarray, qpoints: np.ndarray) -> np.ndarray:
    """Strain of one element's vector field at reference points ``(nq, d, d)``."""
    _, grad = space.basis.tabulate(qpoints)
    grad = grad / space.mesh.spacing
    U = np.asarray(coeffs).reshape(space.dim, space.ns)
    g = np.einsum("ca,qaj->qcj", U, grad)
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def load_vector(space: DGSpace, f=None, g=None, t: float = 0.0, neumann_groups=None) -> np.ndarray:
    """``(f, v)_{T_h} + <g, v>_{F^N}`` for callables ``f(x, t)``, ``g(x, t)``.

    Both callables take points of shape ``(..., d)`` and return ``(..., d)``.
    """
    b = np.zeros((space.n_el, space.dim, space.ns))
    if f is not None:
        tab = space.volume_table()
        x = space.physical_points(np.arange(space.n_el), tab.points)
        fx = np.asarray(f(x, t))
        b += np.einsum("eqc,q,qa->eca", fx, tab.weights, tab.values)
    if g is not None:
        from .mesh import FaceKind

        groups = neumann_groups if neumann_groups is not None else space.mesh.groups(FaceKind.NEUMANN)
        for grp in groups:
            (tab,) = space.face_tables(grp)
            (elems,) = grp.elements
            x = space.physical_points(elems, tab.points)
            gx = np.asarray(g(x, t))
            np.add.at(b, elems, np.einsum("eqc,q,qa->eca", gx, tab.weights, tab.values))
    return b.ravel()
