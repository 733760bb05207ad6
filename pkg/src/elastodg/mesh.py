"""Conforming Cartesian meshes of an axis-aligned box.

Elements are numbered lexicographically with the x index running fastest, so
for every interior face the element with the smaller index sits on the
low-coordinate side.  That element is the "plus" side and the face normal
``n+`` is ``+e_axis``.  Boundary faces carry the outward normal.

Faces are stored as flat arrays (one entry per face) and are grouped by
``(axis, kind, side)`` so that assembly can work on whole groups at once.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

SIDE_NAMES = ("xmin", "xmax", "ymin", "ymax", "zmin", "zmax")


class FaceKind(enum.IntEnum):
    INTERIOR = 0
    DIRICHLET = 1
    NEUMANN = 2


def side_name(axis: int, high: bool) -> str:
    return SIDE_NAMES[2 * axis + int(high)]


def _parse_tag(tag) -> FaceKind:
    if isinstance(tag, FaceKind):
        if tag is FaceKind.INTERIOR:
            raise ValueError("a box side cannot be tagged interior")
        return tag
    t = str(tag).strip().lower()
    if t in ("d", "dirichlet"):
        return FaceKind.DIRICHLET
    if t in ("n", "neumann"):
        return FaceKind.NEUMANN
    raise ValueError(f"unknown boundary tag {tag!r} (expected dirichlet or neumann)")


@dataclass(frozen=True)
class MeshConfig:
    dim: int
    cells: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...] | None = None
    boundary: dict = field(default_factory=dict)
    """Map side name (``xmin`` ... ``zmax``) to ``dirichlet``/``neumann``.
    Missing sides default to Dirichlet."""

    def validate(self) -> list[str]:
        errors = []
        if self.dim not in (2, 3):
            errors.append(f"mesh.dim must be 2 or 3, got {self.dim}")
            return errors
        if len(self.cells) != self.dim:
            errors.append(f"mesh.cells needs {self.dim} entries, got {len(self.cells)}")
        elif any(int(c) < 1 for c in self.cells):
            errors.append("mesh.cells must be >= 1 on every axis")
        bounds = self.resolved_bounds()
        if len(bounds) != self.dim:
            errors.append(f"mesh.bounds needs {self.dim} (lo, hi) pairs")
        elif any(not lo < hi for lo, hi in bounds):
            errors.append("mesh.bounds must satisfy lo < hi on every axis")
        valid = set(SIDE_NAMES[: 2 * self.dim])
        for key, tag in self.boundary.items():
            if key not in valid:
                errors.append(f"mesh.boundary: unknown side {key!r}")
                continue
            try:
                _parse_tag(tag)
            except ValueError as exc:
                errors.append(f"mesh.boundary.{key}: {exc}")
        return errors

    def resolved_bounds(self):
        if self.bounds is None:
            return tuple((0.0, 1.0) for _ in range(self.dim))
        return tuple((float(lo), float(hi)) for lo, hi in self.bounds)

    def side_tags(self) -> dict[str, FaceKind]:
        tags = {name: FaceKind.DIRICHLET for name in SIDE_NAMES[: 2 * self.dim]}
        for key, tag in self.boundary.items():
            tags[key] = _parse_tag(tag)
        return tags


@dataclass(frozen=True)
class Face:
    id: int
    kind: FaceKind
    plus: int
    minus: int | None
    normal: np.ndarray
    h: float
    axis: int


@dataclass(frozen=True)
class FaceGroup:
    """Faces sharing axis, kind and (for boundary faces) the side of the box.

    For interior groups ``elements`` is ``(plus, minus)``; for boundary groups it
    is ``(elem,)`` and ``high`` says whether the face is the element's high side.
    """

    axis: int
    kind: FaceKind
    high: bool
    ids: np.ndarray
    elements: tuple[np.ndarray, ...]

    @property
    def interior(self) -> bool:
        return self.kind is FaceKind.INTERIOR

    @property
    def sign(self) -> float:
        """Sign of the normal along ``axis`` (plus-side normal for interior faces)."""
        return 1.0 if (self.interior or self.high) else -1.0

    def normal(self, dim: int) -> np.ndarray:
        n = np.zeros(dim)
        n[self.axis] = self.sign
        return n


class Mesh:
    """Immutable Cartesian mesh; see module docstring for the conventions."""

    def __init__(self, cfg: MeshConfig):
        errors = cfg.validate()
        if errors:
            raise ValueError("; ".join(errors))
        self.config = cfg
        self.dim = d = cfg.dim
        self.cells = tuple(int(c) for c in cfg.cells)
        bounds = np.array(cfg.resolved_bounds(), dtype=float)
        self.lo, self.hi = bounds[:, 0], bounds[:, 1]
        self.spacing = (self.hi - self.lo) / np.array(self.cells)
        self.n_elements = int(np.prod(self.cells))

        idx = np.indices(self.cells[::-1]).reshape(d, -1)[::-1].T
        self.element_index = idx  # (n_el, d) integer multi-index, x fastest
        self.origins = self.lo + idx * self.spacing
        self.h_K = np.full(self.n_elements, float(np.linalg.norm(self.spacing)))
        self.h = float(self.h_K.max())

        self._tags = cfg.side_tags()
        self._build_faces()

    # -- construction -------------------------------------------------------
    def element_id(self, multi) -> np.ndarray:
        multi = np.asarray(multi)
        strides = np.cumprod((1,) + self.cells[:-1])
        return multi @ strides

    def _build_faces(self):
        d = self.dim
        groups = []
        next_id = 0
        kinds, plus, minus, axes, hs = [], [], [], [], []

        def face_h(axis):
            others = [self.spacing[b] for b in range(d) if b != axis]
            return float(max(others))

        for axis in range(d):
            ranges = [range(n) for n in self.cells]
            ranges[axis] = range(self.cells[axis] - 1)
            lo_multi = np.array(list(itertools.product(*ranges[::-1])), dtype=int).reshape(-1, d)[:, ::-1]
            if lo_multi.size == 0:
                continue
            p = self.element_id(lo_multi)
            step = int(np.prod(self.cells[:axis]))
            m = p + step
            order = np.argsort(p, kind="stable")
            p, m = p[order], m[order]
            ids = np.arange(next_id, next_id + len(p))
            next_id += len(p)
            groups.append(FaceGroup(axis, FaceKind.INTERIOR, True, ids, (p, m)))
            kinds.append(np.full(len(p), FaceKind.INTERIOR))
            plus.append(p)
            minus.append(m)
            axes.append(np.full(len(p), axis))
            hs.append(np.full(len(p), face_h(axis)))

        for axis in range(d):
            for high in (False, True):
                ranges = [range(n) for n in self.cells]
                ranges[axis] = [self.cells[axis] - 1] if high else [0]
                multi = np.array(list(itertools.product(*ranges[::-1])), dtype=int).reshape(-1, d)[:, ::-1]
                e = np.sort(self.element_id(multi))
                kind = self._tags[side_name(axis, high)]
                ids = np.arange(next_id, next_id + len(e))
                next_id += len(e)
                groups.append(FaceGroup(axis, kind, high, ids, (e,)))
                kinds.append(np.full(len(e), kind))
                plus.append(e)
                minus.append(np.full(len(e), -1))
                axes.append(np.full(len(e), axis))
                hs.append(np.full(len(e), face_h(axis)))

        self.face_groups: tuple[FaceGroup, ...] = tuple(groups)
        self.face_kind = np.concatenate(kinds).astype(int)
        self.face_plus = np.concatenate(plus)
        self.face_minus = np.concatenate(minus)
        self.face_axis = np.concatenate(axes)
        self.h_F = np.concatenate(hs)
        self._face_high = np.zeros(next_id, dtype=bool)
        for g in groups:
            self._face_high[g.ids] = g.high
        self.n_faces = next_id

    # -- queries ------------------------------------------------------------
    def groups(self, *kinds: FaceKind):
        return [g for g in self.face_groups if g.kind in kinds]

    def face(self, face_id: int) -> Face:
        if not 0 <= face_id < self.n_faces:
            raise KeyError(f"unknown face id {face_id}")
        kind = FaceKind(self.face_kind[face_id])
        axis = int(self.face_axis[face_id])
        n = np.zeros(self.dim)
        n[axis] = 1.0 if (kind is FaceKind.INTERIOR or self._face_high[face_id]) else -1.0
        minus = int(self.face_minus[face_id])
        return Face(
            id=face_id,
            kind=kind,
            plus=int(self.face_plus[face_id]),
            minus=None if minus < 0 else minus,
            normal=n,
            h=float(self.h_F[face_id]),
            axis=axis,
        )

    def face_measure(self, axis: int) -> float:
        return float(np.prod([self.spacing[b] for b in range(self.dim) if b != axis]))

    def element_measure(self) -> float:
        return float(np.prod(self.spacing))

    def summary(self) -> str:
        counts = {k.name.lower(): int(np.sum(self.face_kind == k)) for k in FaceKind}
        return (
            f"Mesh(dim={self.dim}, cells={self.cells}, elements={self.n_elements}, "
            f"faces={self.n_faces} {counts}, h={self.h:.6g})"
        )

    __repr__ = summary


def build_cartesian_mesh(cfg: MeshConfig) -> Mesh:
    return Mesh(cfg)


def unit_box(dim: int, n: int, boundary: dict | None = None) -> Mesh:
    """Uniform ``n^dim`` mesh of the unit box, all sides Dirichlet by default."""
    return Mesh(MeshConfig(dim, (n,) * dim, boundary=boundary or {}))


def classify_faces(mesh: Mesh) -> dict[FaceKind, np.ndarray]:
    return {k: np.flatnonzero(mesh.face_kind == k) for k in FaceKind}


def face_geometry(mesh: Mesh, face_id: int):
    f = mesh.face(face_id)
    return f.normal, f.h, f.plus, f.minus
