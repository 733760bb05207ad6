"""Reference templates and block scattering for sparse DG operators.

Every element of a Cartesian mesh is a translate of the same box, so each
volume and face integral reduces to a small dense template times a
per-element or per-face coefficient.  Templates are tabulated once per space
and scattered into global CSR matrices group by group.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .fem import DGSpace, SideTable, sym_unit_tensors
from .traces import sym_outer

# side keys used in face templates: "p" (plus/high side), "m" (minus/low side)
SIDES = ("p", "m")


def vector_basis(space: DGSpace, tab: SideTable):
    """Vector basis on a table: values ``(nq, nb, d)``, strains ``(nq, nb, d, d)``, divergence ``(nq, nb)``."""
    d, ns = space.dim, space.ns
    nq = tab.values.shape[0]
    vals = np.zeros((nq, d, ns, d))
    grads = np.zeros((nq, d, ns, d, d))
    for c in range(d):
        vals[:, c, :, c] = tab.values
        grads[:, c, :, c, :] = tab.grads
    vals = vals.reshape(nq, d * ns, d)
    grads = grads.reshape(nq, d * ns, d, d)
    eps = 0.5 * (grads + np.swapaxes(grads, -1, -2))
    div = np.einsum("qbii->qb", grads)
    return vals, eps, div


def tensor_basis(space: DGSpace, tab: SideTable) -> np.ndarray:
    """Symmetric tensor basis values ``(nq, nb, d, d)``, index ``comp * ns + a``."""
    E = sym_unit_tensors(space.dim)
    T = np.einsum("cij,qa->qcaij", E, tab.values)
    return T.reshape(tab.values.shape[0], -1, space.dim, space.dim)


class Templates:
    """Unit-coefficient local matrices for one ``DGSpace``."""

    def __init__(self, space: DGSpace):
        self.space = space
        d = space.dim
        vt = space.volume_table()
        V, E, D = vector_basis(space, vt)
        T = tensor_basis(space, vt)
        w = vt.weights
        self.mass = np.einsum("q,qia,qja->ij", w, V, V)
        self.k_mu = 2.0 * np.einsum("q,qiab,qjab->ij", w, E, E)
        self.k_lam = np.einsum("q,qi,qj->ij", w, D, D)
        self.g_vol = np.einsum("q,qjab,qiab->ij", w, T, E)  # rows v, cols sigma
        self.m_sig = np.einsum("q,qiab,qjab->ij", w, T, T)
        trT = np.einsum("qjaa->qj", T)
        self.m_tr = np.einsum("q,qi,qj->ij", w, trT, trT)
        self._faces = {}
        self.dim = d

    def side(self, axis: int, high: bool):
        key = (axis, high)
        if key not in self._faces:
            tab = self.space.side_table(axis, high)
            V, E, D = vector_basis(self.space, tab)
            T = tensor_basis(self.space, tab)
            n = np.zeros(self.dim)
            n[axis] = 1.0 if high else -1.0
            self._faces[key] = dict(
                w=tab.weights,
                V=V,
                E=E,
                D=D,
                T=T,
                VN=sym_outer(V, n),  # v (.) n_K
                Vn=V @ n,  # v . n_K
                Tn=T @ n,  # tau n_K
            )
        return self._faces[key]

    def face(self, axis: int, row_high: bool, col_high: bool, name: str) -> np.ndarray:
        """Face template between a test side and a trial side.

        ``cons_mu``: 2 eps(w):(v (.) n_v); ``cons_lam``: div(w) (v . n_v);
        ``pen``: (w (.) n_w):(v (.) n_v); ``g``: sigma:(v (.) n_v);
        ``jsig``: (sigma n_s).(tau n_t).
        """
        return _face_template(self, axis, row_high, col_high, name)


def _face_template(tpl: Templates, axis, row_high, col_high, name):
    key = ("tpl", axis, row_high, col_high, name)
    cache = tpl._faces
    if key in cache:
        return cache[key]
    r, c = tpl.side(axis, row_high), tpl.side(axis, col_high)
    w = r["w"]
    if name == "cons_mu":
        out = 2.0 * np.einsum("q,qiab,qjab->ij", w, r["VN"], c["E"])
    elif name == "cons_lam":
        out = np.einsum("q,qi,qj->ij", w, r["Vn"], c["D"])
    elif name == "pen":
        out = np.einsum("q,qiab,qjab->ij", w, r["VN"], c["VN"])
    elif name == "g":
        out = np.einsum("q,qiab,qjab->ij", w, r["VN"], c["T"])
    elif name == "jsig":
        out = np.einsum("q,qia,qja->ij", w, r["Tn"], c["Tn"])
    else:
        raise KeyError(name)
    cache[key] = out
    return out


def scatter(rows_el, cols_el, coef, template, shape, blocks) -> sp.csr_matrix:
    """Sum ``coef[f] * template`` into block ``(rows_el[f], cols_el[f])`` of a sparse matrix."""
    nr, nc = blocks
    ti, tj = np.nonzero(np.abs(template) > 1e-14 * max(np.abs(template).max(), 1e-300))
    tv = template[ti, tj]
    rows_el = np.asarray(rows_el, dtype=np.int64)
    cols_el = np.asarray(cols_el, dtype=np.int64)
    coef = np.broadcast_to(np.asarray(coef, dtype=float), rows_el.shape)
    rows = (rows_el[:, None] * nr + ti[None, :]).ravel()
    cols = (cols_el[:, None] * nc + tj[None, :]).ravel()
    data = (coef[:, None] * tv[None, :]).ravel()
    return sp.csr_matrix((data, (rows, cols)), shape=shape)


def block_diagonal(blocks: np.ndarray) -> sp.csr_matrix:
    """CSR matrix from dense diagonal blocks ``(n_el, nb, nb)``."""
    n, nb, _ = blocks.shape
    i = np.repeat(np.arange(nb), nb)
    j = np.tile(np.arange(nb), nb)
    rows = (np.arange(n)[:, None] * nb + i[None, :]).ravel()
    cols = (np.arange(n)[:, None] * nb + j[None, :]).ravel()
    return sp.csr_matrix((blocks.reshape(n, -1).ravel(), (rows, cols)), shape=(n * nb, n * nb))


def side_pairs(group):
    """Yield ``(row_high, col_high, row_elems, col_elems, row_weight_side, col_side)`` for a group.

    For interior faces the plus element is on its high side.  Side labels are
    ``"p"``/``"m"`` for interior groups and ``"b"`` for boundary groups.
    """
    if group.interior:
        p, m = group.elements
        sides = (("p", True, p), ("m", False, m))
        for rs, rh, re in sides:
            for cs, ch, ce in sides:
                yield rh, ch, re, ce, rs, cs
    else:
        (e,) = group.elements
        yield group.high, group.high, e, e, "b", "b"


def side_weight(side: str, delta: float) -> float:
    """Weight of one side in ``{.}_delta`` (boundary: the single trace)."""
    return {"p": delta, "m": 1.0 - delta, "b": 1.0}[side]


class BlockDiagInverse:
    """Apply the inverse of a block-diagonal SPD matrix with dense per-element blocks."""

    def __init__(self, blocks: np.ndarray):
        self.blocks = blocks
        self.inv = np.linalg.inv(blocks)
        self.nb = blocks.shape[1]

    def __call__(self, r: np.ndarray) -> np.ndarray:
        R = np.asarray(r).reshape(-1, self.nb)
        return np.einsum("eij,ej->ei", self.inv, R).ravel()

    def matrix(self) -> sp.csr_matrix:
        return block_diagonal(self.inv)
