"""Jumps and (weighted) averages on faces, evaluated pointwise.

All operators act on values at face quadrature points.  A ``FaceTraceData``
holds the plus-side trace, the minus-side trace (``None`` on boundary faces)
and the normal ``n+`` (outward normal on boundary faces).  Vectors have a
trailing axis of length d, tensors trailing ``(d, d)`` axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import DGSpace, SideTable
from .mesh import FaceGroup, FaceKind


@dataclass
class FaceTraceData:
    plus: np.ndarray
    minus: np.ndarray | None
    normal: np.ndarray

    @property
    def boundary(self) -> bool:
        return self.minus is None


def check_weight(delta: float) -> float:
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"weight delta must lie in [0, 1], got {delta}")
    return delta


def sym_outer(v: np.ndarray, n: np.ndarray) -> np.ndarray:
    """``v (.) n = (v n^T + n v^T) / 2``."""
    vn = v[..., :, None] * n[..., None, :]
    return 0.5 * (vn + np.swapaxes(vn, -1, -2))


def jump_vector(tr: FaceTraceData) -> np.ndarray:
    """Symmetric tensor jump ``v+ (.) n+ + v- (.) n-`` (``v (.) n`` on the boundary)."""
    out = sym_outer(tr.plus, tr.normal)
    if tr.minus is not None:
        out = out - sym_outer(tr.minus, tr.normal)
    return out


def jump_vector_full(tr: FaceTraceData) -> np.ndarray:
    """Non-symmetrised jump ``v+ x n+ + v- x n-`` (used only for comparisons)."""
    n = tr.normal
    out = tr.plus[..., :, None] * n[..., None, :]
    if tr.minus is not None:
        out = out - tr.minus[..., :, None] * n[..., None, :]
    return out


def jump_tensor(tr: FaceTraceData) -> np.ndarray:
    """Vector jump ``tau+ n+ + tau- n-``; defined on interior faces only."""
    if tr.minus is None:
        raise ValueError("tensor jumps are only defined on interior faces")
    return np.einsum("...ij,...j->...i", tr.plus - tr.minus, np.broadcast_to(tr.normal, tr.plus.shape[:-1]))


def weighted_average(tr: FaceTraceData, delta: float = 0.5) -> np.ndarray:
    """``delta plus + (1 - delta) minus``; the single trace on boundary faces."""
    delta = check_weight(delta)
    if tr.minus is None:
        return tr.plus
    return delta * tr.plus + (1.0 - delta) * tr.minus


def average(tr: FaceTraceData) -> np.ndarray:
    return weighted_average(tr, 0.5)


def contract(a: np.ndarray, b: np.ndarray, rank: int = 2) -> np.ndarray:
    """Pointwise inner product over the trailing ``rank`` value axes."""
    if rank == 2:
        return np.einsum("...ij,...ij->...", a, b)
    if rank == 1:
        return np.einsum("...i,...i->...", a, b)
    raise ValueError(f"rank must be 1 or 2, got {rank}")


# -- extracting traces of discrete fields ------------------------------------
def _eval(space: DGSpace, field, table: SideTable, elements, kind: str):
    if kind == "vector":
        return space.eval_vector(field, table, elements)
    if kind == "tensor":
        return space.eval_tensor(field, table, elements)
    if kind == "strain":
        return space.eval_strain(field, table, elements)
    if kind == "gradient":
        return space.eval_gradient(field, table, elements)
    raise ValueError(kind)


def group_traces(space: DGSpace, field, group: FaceGroup, kind: str = "vector", n1=None) -> FaceTraceData:
    """Traces of a discrete field on every face of a group, ``(n_faces, nq, ...)``."""
    tabs = space.face_tables(group, n1)
    plus = _eval(space, field, tabs[0], group.elements[0], kind)
    minus = _eval(space, field, tabs[1], group.elements[1], kind) if group.interior else None
    return FaceTraceData(plus, minus, group.normal(space.dim))


def callable_traces(space: DGSpace, func, group: FaceGroup, n1=None) -> FaceTraceData:
    """Traces of a (possibly discontinuous) callable ``func(x, elem)`` evaluated per side."""
    tabs = space.face_tables(group, n1)
    side = []
    for tab, elems in zip(tabs, group.elements):
        x = space.physical_points(elems, tab.points)
        side.append(np.asarray(func(x, elems)))
    return FaceTraceData(side[0], side[1] if group.interior else None, group.normal(space.dim))


def face_weights(space: DGSpace, group: FaceGroup, n1=None) -> np.ndarray:
    return space.face_tables(group, n1)[0].weights


def face_integral(space: DGSpace, group: FaceGroup, values: np.ndarray, n1=None) -> float:
    """Integrate pointwise values ``(n_faces, nq)`` over all faces of the group."""
    return float(np.einsum("fq,q->", values, face_weights(space, group, n1)))


# -- the element-to-face identity --------------------------------------------
def surface_pairing(space: DGSpace, tau, v) -> float:
    """``sum_K <tau n_K, v>_{dK}`` computed element by element."""
    total = 0.0
    elems = np.arange(space.n_el)
    for axis in range(space.dim):
        for high in (False, True):
            tab = space.side_table(axis, high)
            n = np.zeros(space.dim)
            n[axis] = 1.0 if high else -1.0
            T = space.eval_tensor(tau, tab, elems)
            V = space.eval_vector(v, tab, elems)
            vals = np.einsum("eqij,j,eqi->eq", T, n, V)
            total += float(np.einsum("eq,q->", vals, tab.weights))
    return total


def surface_pairing_faces(space: DGSpace, tau, v) -> float:
    """``<{tau}, [[v]]>_{F_h} + <[[tau]], {v}>_{F_h^o}`` computed face by face."""
    total = 0.0
    for group in space.mesh.face_groups:
        ttr = group_traces(space, tau, group, "tensor")
        vtr = group_traces(space, v, group, "vector")
        vals = contract(average(ttr), jump_vector(vtr))
        if group.kind is FaceKind.INTERIOR:
            vals = vals + contract(jump_tensor(ttr), average(vtr), rank=1)
        total += face_integral(space, group, vals)
    return total
