import numpy as np
import pytest
from conftest import make_space, random_material
from hypothesis import given
from hypothesis import strategies as st

import identities
from elastodg.traces import (
    FaceTraceData, check_weight, jump_tensor, jump_vector, surface_pairing, surface_pairing_faces, weighted_average,
)

E2 = np.array([1.0, 0.0])


def tr(plus, minus, n):
    return FaceTraceData(np.asarray(plus, float), None if minus is None else np.asarray(minus, float), np.asarray(n, float))


def test_vector_jump_examples():
    assert np.allclose(jump_vector(tr([1.0, 2.0], [1.0, 2.0], E2)), 0.0)
    assert np.allclose(jump_vector(tr([1.0, 0.0], None, E2)), [[1, 0], [0, 0]])
    assert np.allclose(jump_vector(tr([0.0, 1.0], [0.0, 0.0], E2)), [[0, 0.5], [0.5, 0]])


def test_tensor_jump_examples():
    I = np.eye(2)
    assert np.allclose(jump_tensor(tr(I, I, [0, 1])), 0.0)
    assert np.allclose(jump_tensor(tr(I, 0 * I, [0, 1])), [0, 1])
    with pytest.raises(ValueError):
        jump_tensor(tr(I, None, [0, 1]))


def test_weighted_average_examples():
    assert np.allclose(weighted_average(tr([2.0], [4.0], E2), 0.5), 3.0)
    assert np.allclose(weighted_average(tr([2.0], [4.0], E2), 1.0), 2.0)
    assert np.allclose(weighted_average(tr([7.0], None, E2), 0.3), 7.0)
    with pytest.raises(ValueError):
        check_weight(1.5)


def test_surface_pairing_examples(rng):
    space = make_space(2, 1, 2)
    tau = space.interpolate_tensor(lambda x: np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)))
    v = space.interpolate(lambda x: np.broadcast_to([0.3, -1.2], x.shape))
    assert surface_pairing(space, tau, v) == pytest.approx(0.0, abs=1e-14)
    assert surface_pairing(space, rng.standard_normal(space.n_sigma_dofs), space.zeros()) == 0.0
    space = make_space(2, 2, 2)
    tau, v = rng.standard_normal(space.n_sigma_dofs), rng.standard_normal(space.n_dofs)
    assert surface_pairing(space, tau, v) == pytest.approx(surface_pairing_faces(space, tau, v), abs=1e-12)


fields = st.tuples(st.integers(2, 3), st.integers(1, 2), st.integers(1, 3), st.integers(0, 2**31))


def _setup(dim, n, k, seed, neumann=False):
    space = make_space(dim, n, k, {"ymax": "neumann"} if neumann else None)
    rng = np.random.default_rng(seed)
    return space, rng, rng.standard_normal(space.n_sigma_dofs), rng.standard_normal(space.n_dofs)


@given(fields, st.booleans())
def test_element_to_face(params, neumann):
    space, _, tau, v = _setup(*params, neumann=neumann)
    assert identities.element_to_face(space, tau, v) < 1e-12


@given(fields, st.floats(0.0, 1.0))
def test_weighted_tensor_average(params, delta):
    space, _, tau, _ = _setup(*params)
    assert identities.weighted_tensor_average(space, tau, delta) < 1e-12


@given(fields, st.floats(0.0, 1.0))
def test_shifted_averages(params, delta):
    space, rng, _, u = _setup(*params)
    assert identities.shifted_averages(space, random_material(space.mesh, rng), u, delta) < 1e-12


@given(fields)
def test_full_jump(params):
    space, _, tau, v = _setup(*params)
    assert identities.full_jump(space, tau, v) < 1e-12


@given(fields, st.floats(0.0, 1.0))
def test_orientation_swap(params, delta):
    space, _, tau, v = _setup(*params)
    assert identities.orientation_swap(space, tau, v, delta) < 1e-12


def test_continuous_field_has_no_jump():
    space = make_space(2, 3, 2)
    u = space.interpolate(lambda x: np.stack([x[..., 0] * x[..., 1], x[..., 1] ** 2], -1))
    for grp in space.mesh.face_groups:
        if grp.interior:
            from elastodg.traces import group_traces

            assert np.allclose(jump_vector(group_traces(space, u, grp)), 0.0, atol=1e-14)
