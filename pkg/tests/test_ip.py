import warnings

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from conftest import make_space, random_material
from hypothesis import given
from hypothesis import strategies as st

from elastodg.ip import (
    IpConfig, assemble_ip, assemble_ip_rhs, coercivity_constant, coercivity_probe, face_penalty, penalty_value,
)
from elastodg.manufactured import ExactSolution
from elastodg.material import MaterialField
from elastodg.mesh import FaceKind, unit_box
from oracles import dense_ip_matrix, ip_bilinear


def bubble(x):
    b = x[..., 0] * (1 - x[..., 0]) * x[..., 1] * (1 - x[..., 1])
    return np.stack([b, (1 + x[..., 0]) * b], -1)


def ip(space, mat=None, **kw):
    mat = mat or MaterialField.uniform(space.mesh, 1.0, 1.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return assemble_ip(space, mat, IpConfig(**kw))


def test_penalty_examples():
    assert penalty_value(0.25, 2, 5.0, 10.0) == pytest.approx(800.0)
    assert penalty_value(0.25, 4, 5.0, 10.0) == pytest.approx(3200.0)
    assert penalty_value(0.125, 2, 5.0, 10.0) == pytest.approx(1600.0)
    mesh = unit_box(3, 4)
    mat = MaterialField.uniform(mesh, 1.0, 1.0, 1.0)
    assert face_penalty(mesh, mat, 2, 10.0, 0) == pytest.approx(800.0)


def test_penalty_undefined_on_neumann():
    mesh = unit_box(2, 2, {"xmin": "neumann"})
    mat = MaterialField.uniform(mesh, 1.0, 1.0, 1.0)
    fid = next(i for i in range(mesh.n_faces) if mesh.face(i).kind is FaceKind.NEUMANN)
    with pytest.raises(ValueError):
        face_penalty(mesh, mat, 1, 10.0, fid)


@pytest.mark.parametrize("kw", [dict(theta=2), dict(theta=1, delta=0.3), dict(c0=0.0), dict(delta=1.5)])
def test_config_rejects(kw):
    assert IpConfig(**kw).validate()
    with pytest.raises(ValueError):
        ip(make_space(), **kw)


def test_nonsymmetric_variants_warn():
    with pytest.warns(UserWarning, match="theta=1"):
        assemble_ip(make_space(), MaterialField.uniform(unit_box(2, 2), 1, 1, 1), IpConfig(theta=1))


@pytest.mark.parametrize("dim,k,delta,boundary", [(2, 1, 0.5, None), (2, 2, 0.3, {"ymax": "neumann"}), (3, 1, 0.8, None)])
def test_matches_pointwise_oracle(dim, k, delta, boundary, rng):
    space = make_space(dim, 2 if dim == 2 else 1, k, boundary)
    mat = random_material(space.mesh, rng)
    for theta in (-1, 0, 1):
        cfg = IpConfig(theta=theta, delta=delta if theta == -1 else 0.5, c0=7.0)
        op = ip(space, mat, **cfg.__dict__)
        for _ in range(6):
            w, v = rng.standard_normal((2, space.n_dofs))
            ref = ip_bilinear(space, mat, cfg, w, v)
            assert op.bilinear(w, v) == pytest.approx(ref, rel=1e-11, abs=1e-11)


def test_dense_matrix_matches_oracle(rng):
    space = make_space(2, 2, 1, {"xmin": "neumann"})
    mat = random_material(space.mesh, rng)
    cfg = IpConfig(c0=7.0, delta=0.4)
    ref = dense_ip_matrix(space, mat, cfg)
    assert np.max(np.abs(ip(space, mat, **cfg.__dict__).A.toarray() - ref)) < 1e-11 * np.max(np.abs(ref))


@given(st.integers(2, 3), st.integers(1, 3), st.floats(0, 1), st.integers(0, 2**31))
def test_sip_symmetric(dim, k, delta, seed):
    rng = np.random.default_rng(seed)
    space = make_space(dim, 2, k)
    op = ip(space, random_material(space.mesh, rng), delta=delta)
    u, v = rng.standard_normal((2, space.n_dofs))
    a, b = op.bilinear(u, v), op.bilinear(v, u)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@given(st.integers(2, 3), st.integers(1, 3), st.integers(0, 2**31))
def test_nip_flux_cancels(dim, k, seed):
    rng = np.random.default_rng(seed)
    space = make_space(dim, 2, k)
    op = ip(space, random_material(space.mesh, rng), theta=1)
    v = rng.standard_normal(space.n_dofs)
    a, e = op.bilinear(v, v), op.energy_seminorm_sq(v)
    assert abs(a - e) <= 1e-12 * e


def test_continuous_field_sees_volume_only():
    space = make_space(2, 4, 2)
    op = ip(space)
    v = space.interpolate(bubble)
    vol = float(v @ (op.volume @ v))
    assert op.bilinear(v, v) == pytest.approx(vol, rel=1e-12)
    assert float(v @ (op.jumps @ v)) < 1e-26


@pytest.mark.parametrize("k", [1, 2, 3])
def test_coercive_with_large_penalty(k):
    op = ip(make_space(2, 4, k), c0=100.0)
    assert coercivity_probe(op) > 0
    assert coercivity_constant(op) > 0


def test_small_penalty_loses_coercivity():
    assert coercivity_constant(ip(make_space(2, 4, 2), c0=0.05)) < 0


def test_probe_on_continuous_subspace():
    space = make_space(2, 4, 2)
    op = ip(space, c0=1.0)
    assert coercivity_probe(op, samples=8, subspace=lambda r: space.interpolate(lambda x: r[0] * bubble(x))) >= 1 - 1e-10


def test_coercivity_monotone_in_c0():
    space = make_space(2, 3, 2)
    vals = [coercivity_constant(ip(space, c0=c)) for c in (0.5, 2.0, 10.0, 50.0)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_damping_matrix():
    space = make_space(2, 3, 2)
    op = ip(space, c_F=3.0)
    assert ip(space).damping is None
    w = np.linalg.eigvalsh(op.C.toarray())
    assert w.min() > -1e-12 * w.max()
    v = space.interpolate(bubble)
    assert np.max(np.abs(op.C @ v)) < 1e-12


def test_rhs():
    space = make_space(2, 1, 1, {"xmax": "neumann"})
    assert np.all(assemble_ip_rhs(space) == 0)
    f = lambda x, t: np.broadcast_to([2.0, -1.0], x.shape)
    b = space.vec(assemble_ip_rhs(space, f))
    M = ip(space).mass.toarray()[:4, :4]
    assert np.allclose(b[0, 0], 2.0 * M.sum(axis=1))
    assert np.allclose(b[0, 1], -1.0 * M.sum(axis=1))
    g = lambda x, t: np.broadcast_to([1.0, 0.0], x.shape)
    dirichlet = make_space(2, 1, 1)
    assert np.all(assemble_ip_rhs(dirichlet, None, g) == 0)
    gb = space.vec(assemble_ip_rhs(space, None, g))
    assert gb[0, 0].sum() == pytest.approx(1.0)  # the x-max edge has unit length


def _consistency_residual(n, k, t=0.3):
    space = make_space(2, n, k)
    op = ip(space)
    ex = ExactSolution(2)
    u = space.interpolate(ex.u, t)
    acc = space.interpolate(ex.u_tt, t)
    r = op.mass @ acc + op.A @ u - assemble_ip_rhs(space, ex.forcing, None, t)
    N = (op.volume + op.penalty + op.mass).tocsc()
    return float(np.sqrt(r @ spla.spsolve(N, r)))


@pytest.mark.parametrize("k", [1, 2])
def test_galerkin_consistency(k):
    r1, r2 = _consistency_residual(4, k), _consistency_residual(8, k)
    assert np.log2(r1 / r2) >= k - 0.25
