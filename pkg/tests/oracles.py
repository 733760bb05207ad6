"""Independent reference computations used by the tests.

These rebuild operators one basis function at a time from pointwise traces
and quadrature, without the template/scatter machinery of the library.
"""

from __future__ import annotations

import numpy as np

from elastodg.fem import DGSpace
from elastodg.material import apply_stiffness
from elastodg.mesh import FaceKind
from elastodg.traces import contract, group_traces, jump_vector, weighted_average


def unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def _face_groups(space, *kinds):
    return [g for g in space.mesh.face_groups if g.kind in kinds]


def _stress_traces(space, mat, u, grp):
    tr = group_traces(space, u, grp, "strain")
    p_el = grp.elements[0]
    plus = apply_stiffness(tr.plus, mat.lam[p_el][:, None], mat.mu[p_el][:, None])
    minus = None
    if tr.minus is not None:
        m_el = grp.elements[1]
        minus = apply_stiffness(tr.minus, mat.lam[m_el][:, None], mat.mu[m_el][:, None])
    return type(tr)(plus, minus, tr.normal)


def _face_int(space, grp, vals):
    w = space.face_tables(grp)[0].weights
    return float(np.einsum("fq,q->", vals, w))


def ip_bilinear(space: DGSpace, mat, cfg, w, v) -> float:
    """a(w, v) from pointwise traces (volume + flux + transpose + penalty)."""
    tab = space.volume_table()
    ew, ev = space.eval_strain(w, tab), space.eval_strain(v, tab)
    sw = apply_stiffness(ew, mat.lam[:, None], mat.mu[:, None])
    total = float(np.einsum("eqij,eqij,q->", sw, ev, tab.weights))
    k = space.degree
    for grp in _face_groups(space, FaceKind.INTERIOR, FaceKind.DIRICHLET):
        jw = jump_vector(group_traces(space, w, grp))
        jv = jump_vector(group_traces(space, v, grp))
        aw = weighted_average(_stress_traces(space, mat, w, grp), cfg.delta)
        av = weighted_average(_stress_traces(space, mat, v, grp), cfg.delta)
        S = cfg.c0 * k**2 * mat.group_scale(grp) / space.mesh.h_F[grp.ids]
        total -= _face_int(space, grp, contract(aw, jv))
        total += cfg.theta * _face_int(space, grp, contract(jw, av))
        total += _face_int(space, grp, S[:, None] * contract(jw, jv))
    return total


def dense_ip_matrix(space, mat, cfg) -> np.ndarray:
    n = space.n_dofs
    basis = [unit(n, i) for i in range(n)]
    return np.array([[ip_bilinear(space, mat, cfg, basis[j], basis[i]) for j in range(n)] for i in range(n)])


def mixed_b(space, tau, v, delta) -> float:
    """b(tau, v) = (tau, eps(v)) - <{tau}_delta, [[v]]>_{F^o u F^D}."""
    tab = space.volume_table()
    total = float(np.einsum("eqij,eqij,q->", space.eval_tensor(tau, tab), space.eval_strain(v, tab), tab.weights))
    for grp in _face_groups(space, FaceKind.INTERIOR, FaceKind.DIRICHLET):
        avg = weighted_average(group_traces(space, tau, grp, "tensor"), delta)
        total -= _face_int(space, grp, contract(avg, jump_vector(group_traces(space, v, grp))))
    return total


def compliance_mass_dense(space, mat) -> np.ndarray:
    """(A sigma, tau) by brute force."""
    from elastodg.material import apply_compliance

    tab = space.volume_table()
    ns = space.n_sigma_dofs
    vals = [space.eval_tensor(unit(ns, i), tab) for i in range(ns)]
    out = np.empty((ns, ns))
    for j in range(ns):
        a = apply_compliance(vals[j], mat.lam[:, None], mat.mu[:, None], space.dim)
        for i in range(ns):
            out[i, j] = np.einsum("eqij,eqij,q->", a, vals[i], tab.weights)
    return out


def dense_G(space, delta) -> np.ndarray:
    n, ns = space.n_dofs, space.n_sigma_dofs
    return np.array([[mixed_b(space, unit(ns, j), unit(n, i), delta) for j in range(ns)] for i in range(n)])
