import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastodg.mesh import FaceKind, MeshConfig, build_cartesian_mesh, classify_faces, face_geometry, unit_box


def count(mesh, kind):
    return int(np.sum(mesh.face_kind == kind))


def test_2x2_counts():
    m = unit_box(2, 2)
    assert m.n_elements == 4
    assert count(m, FaceKind.INTERIOR) == 4
    assert count(m, FaceKind.DIRICHLET) + count(m, FaceKind.NEUMANN) == 8


def test_single_cube_cell():
    m = build_cartesian_mesh(MeshConfig(3, (1, 1, 1)))
    assert m.n_elements == 1
    assert count(m, FaceKind.INTERIOR) == 0
    assert m.n_faces == 6


def test_cube_4_geometry():
    m = unit_box(3, 4)
    assert m.h == pytest.approx(np.sqrt(3) / 4)
    assert np.allclose(m.h_F, 0.25)


@given(st.integers(2, 3), st.lists(st.integers(1, 4), min_size=3, max_size=3))
def test_face_count_closed_form(dim, cells):
    cells = tuple(cells[:dim])
    m = build_cartesian_mesh(MeshConfig(dim, cells))
    interior = sum((cells[a] - 1) * np.prod([cells[b] for b in range(dim) if b != a]) for a in range(dim))
    boundary = sum(2 * np.prod([cells[b] for b in range(dim) if b != a]) for a in range(dim))
    assert count(m, FaceKind.INTERIOR) == interior
    assert m.n_faces == interior + boundary
    assert m.n_elements == np.prod(cells)


def test_classification():
    m = unit_box(2, 2)
    c = classify_faces(m)
    assert len(c[FaceKind.DIRICHLET]) == 8 and len(c[FaceKind.NEUMANN]) == 0
    m = unit_box(2, 2, {"xmin": "neumann"})
    c = classify_faces(m)
    assert len(c[FaceKind.NEUMANN]) == 2
    all_ids = np.sort(np.concatenate(list(c.values())))
    assert np.array_equal(all_ids, np.arange(m.n_faces))
    m = build_cartesian_mesh(MeshConfig(3, (1, 1, 1), boundary={s: "neumann" for s in
                                                                ("xmin", "xmax", "ymin", "ymax", "zmin", "zmax")}))
    c = classify_faces(m)
    assert len(c[FaceKind.NEUMANN]) == 6 and len(c[FaceKind.DIRICHLET]) == 0


def test_orientation_and_geometry():
    m = unit_box(2, 2)
    hit = False
    for fid in range(m.n_faces):
        n, h, plus, minus = face_geometry(m, fid)
        assert np.linalg.norm(n) == 1.0
        if minus is not None:
            assert plus < minus
            assert n[m.face(fid).axis] == 1.0
            if {plus, minus} == {0, 1}:
                assert plus == 0 and np.array_equal(n, [1.0, 0.0])
                hit = True
    assert hit
    # a boundary face on x-max
    f = next(m.face(i) for i in range(m.n_faces) if m.face(i).minus is None and m.face(i).axis == 0
             and m.origins[m.face(i).plus][0] > 0.4)
    assert np.array_equal(f.normal, [1.0, 0.0])
    assert np.allclose(unit_box(2, 8).h_F, 1 / 8)


def test_unknown_face_id():
    with pytest.raises(KeyError):
        unit_box(2, 2).face(99)


@pytest.mark.parametrize(
    "cfg",
    [
        MeshConfig(4, (1, 1, 1, 1)),
        MeshConfig(2, (2, 2), bounds=((0, 1), (1, 1))),
        MeshConfig(2, (0, 2)),
        MeshConfig(2, (2, 2), boundary={"zmin": "neumann"}),
        MeshConfig(2, (2, 2), boundary={"xmin": "robin"}),
    ],
)
def test_rejects_invalid(cfg):
    assert cfg.validate()
    with pytest.raises(ValueError):
        build_cartesian_mesh(cfg)


def test_validate_lists_all_errors():
    cfg = MeshConfig(2, (0, 2), bounds=((0, 1), (1, 1)), boundary={"xmin": "robin"})
    assert len(cfg.validate()) == 3


@given(st.integers(2, 3), st.integers(1, 3))
def test_closed_surfaces(dim, n):
    """Signed outward face measures of every element sum to zero."""
    m = unit_box(dim, n)
    total = np.zeros((m.n_elements, dim))
    for fid in range(m.n_faces):
        f = m.face(fid)
        meas = m.face_measure(f.axis)
        total[f.plus] += meas * f.normal
        if f.minus is not None:
            total[f.minus] -= meas * f.normal
    assert np.allclose(total, 0.0)


def test_summary_text():
    assert "elements=4" in unit_box(2, 2).summary()
