"""Closed triangulated surfaces: generators, angle-defect curvature, rescaling
to the curvature bound K >= 1, and OFF input/output.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import HypothesisViolation, MeshError

__all__ = [
    "TriSurface",
    "DiscreteCurvature",
    "generate_icosphere",
    "generate_spheroid",
    "generate_dumbbell",
    "rescale_to_curvature_bound",
    "load_off",
    "save_off",
    "off_text",
    "write_atomic",
    "MAX_SUBDIVISIONS",
]

MAX_SUBDIVISIONS = 8


def _face_areas(vertices, faces):
    p0, p1, p2 = (vertices[faces[:, i]] for i in range(3))
    return 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1)


def _edge_table(faces):
    """Undirected edges of ``faces`` with the number of incident faces."""
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0, return_counts=True)


@dataclass(frozen=True, eq=False)
class TriSurface:
    """A closed, manifold triangle mesh.

    Parameters
    ----------
    vertices : (V, 3) array
        Vertex positions.
    faces : (F, 3) int array
        Vertex indices of each triangle, consistently oriented.
    meta : dict
        Free-form generator metadata (kind, parameters), carried into reports.

    Raises
    ------
    MeshError
        If the mesh is empty, has an edge not shared by exactly two faces,
        a zero-area face or an unreferenced vertex.
    """

    vertices: np.ndarray
    faces: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        f = np.ascontiguousarray(self.faces, dtype=np.int64)
        if f.size == 0:
            raise MeshError("surface has no faces (boundary/empty mesh)")
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must have shape (V, 3)")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError("faces must be triangles")
        if f.min() < 0 or f.max() >= len(v):
            raise MeshError("face index out of range")
        _, counts = _edge_table(f)
        if np.any(counts > 2):
            raise MeshError("non-manifold edge (shared by more than two faces)")
        if np.any(counts < 2):
            raise MeshError("boundary edge (surface is not closed)")
        if np.any(_face_areas(v, f) <= 0.0):
            raise MeshError("degenerate (zero-area) face")
        if len(np.unique(f)) != len(v):
            raise MeshError("unreferenced vertex")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def face_areas(self) -> np.ndarray:
        return _face_areas(self.vertices, self.faces)

    @cached_property
    def vertex_area(self) -> np.ndarray:
        """Barycentric lumped area: one third of each incident face."""
        a = np.zeros(self.n_vertices)
        for i in range(3):
            np.add.at(a, self.faces[:, i], self.face_areas / 3.0)
        return a

    @property
    def area(self) -> float:
        return float(self.face_areas.sum())

    @cached_property
    def edges(self) -> np.ndarray:
        return _edge_table(self.faces)[0]

    @property
    def mean_edge_length(self) -> float:
        e = self.edges
        return float(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1).mean())

    @cached_property
    def corner_angles(self) -> np.ndarray:
        """(F, 3) interior angle of each face at each of its corners."""
        v, f = self.vertices, self.faces
        ang = np.empty(f.shape)
        for i in range(3):
            a = v[f[:, (i + 1) % 3]] - v[f[:, i]]
            b = v[f[:, (i + 2) % 3]] - v[f[:, i]]
            cross = np.linalg.norm(np.cross(a, b), axis=1)
            ang[:, i] = np.arctan2(cross, np.einsum("ij,ij->i", a, b))
        return ang

    @property
    def genus(self) -> int:
        chi = self.n_vertices - len(self.edges) + self.n_faces
        return (2 - chi) // 2

    @cached_property
    def curvature(self) -> DiscreteCurvature:
        return DiscreteCurvature.from_surface(self)

    def transformed(self, rotation=None, translation=None, scale=1.0) -> TriSurface:
        """Return a copy with ``x -> scale * R x + t``."""
        v = self.vertices
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=float).T
        v = scale * v
        if translation is not None:
            v = v + np.asarray(translation, dtype=float)
        return TriSurface(v, self.faces, dict(self.meta))


@dataclass(frozen=True)
class DiscreteCurvature:
    """Per-vertex Gauss curvature as angle defect over barycentric area."""

    angle_defect: np.ndarray
    K: np.ndarray

    @classmethod
    def from_surface(cls, surface: TriSurface) -> DiscreteCurvature:
        angle_sum = np.zeros(surface.n_vertices)
        for i in range(3):
            np.add.at(angle_sum, surface.faces[:, i], surface.corner_angles[:, i])
        defect = 2.0 * np.pi - angle_sum
        return cls(defect, defect / surface.vertex_area)

    @property
    def K_min(self) -> float:
        return float(self.K.min())

    @property
    def total(self) -> float:
        return float(self.angle_defect.sum())


# --- generators ---------------------------------------------------------------


def _icosahedron():
    # one vertex on each pole, two staggered rings of five at z = +-1/sqrt(5)
    z = 1.0 / np.sqrt(5.0)
    r = 2.0 / np.sqrt(5.0)
    verts = [(0.0, 0.0, 1.0)]
    for i in range(5):
        t = 2.0 * np.pi * i / 5.0
        verts.append((r * np.cos(t), r * np.sin(t), z))
    for i in range(5):
        t = 2.0 * np.pi * (i + 0.5) / 5.0
        verts.append((r * np.cos(t), r * np.sin(t), -z))
    verts.append((0.0, 0.0, -1.0))
    faces = []
    for i in range(5):
        a, b = 1 + i, 1 + (i + 1) % 5
        c, d = 6 + i, 6 + (i + 1) % 5
        faces += [(0, a, b), (a, c, b), (b, c, d), (c, 11, d)]
    return np.array(verts), np.array(faces)


def _subdivide(vertices, faces):
    """Split every triangle in four, projecting new midpoints to the unit sphere."""
    verts = list(vertices)
    cache = {}

    def midpoint(i, j):
        key = (i, j) if i < j else (j, i)
        if key not in cache:
            m = vertices[i] + vertices[j]
            verts.append(m / np.linalg.norm(m))
            cache[key] = len(verts) - 1
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
    return np.array(verts), np.array(out)


def _unit_icosphere(subdivisions):
    if not 0 <= subdivisions <= MAX_SUBDIVISIONS:
        raise ValueError(f"subdivisions must be in [0, {MAX_SUBDIVISIONS}], got {subdivisions}")
    v, f = _icosahedron()
    for _ in range(subdivisions):
        v, f = _subdivide(v, f)
    return v, f


def generate_icosphere(subdivisions: int) -> TriSurface:
    """Unit sphere as an icosahedron subdivided ``subdivisions`` times.

    The icosahedron is oriented with a vertex at each pole ``(0, 0, +-1)``,
    so the z axis is a five-fold symmetry axis.
    """
    v, f = _unit_icosphere(int(subdivisions))
    return TriSurface(v, f, {"generator": "icosphere", "subdivisions": int(subdivisions)})


def generate_spheroid(axis_ratio: float, subdivisions: int) -> TriSurface:
    """Icosphere stretched by ``(1, 1, axis_ratio)``."""
    if not 0.2 <= axis_ratio <= 5.0:
        raise ValueError(f"axis_ratio must be in [0.2, 5], got {axis_ratio}")
    v, f = _unit_icosphere(int(subdivisions))
    v = v * np.array([1.0, 1.0, float(axis_ratio)])
    return TriSurface(
        v, f, {"generator": "spheroid", "axis_ratio": float(axis_ratio), "subdivisions": int(subdivisions)}
    )


DUMBBELL_NECK_WIDTH = 0.15


def dumbbell_radial_profile(uz, neck_radius, width=DUMBBELL_NECK_WIDTH):
    """Radius along the unit direction with z-component ``uz``.

    Two unit spheres centred at ``(0, 0, +-c)`` with ``c = sqrt(1 - neck**2)``
    meet in a circle of radius ``neck``. Their union has radial function
    ``c|uz| + sqrt(1 - c**2 (1 - uz**2))``; the crease is removed by replacing
    ``|uz|`` with ``width * log(cosh(uz / width))``, which keeps the neck radius
    exact at ``uz = 0``.
    """
    uz = np.asarray(uz, dtype=float)
    c = np.sqrt(1.0 - neck_radius**2)
    smooth_abs = width * np.logaddexp(uz / width, -uz / width) - width * np.log(2.0)
    return c * smooth_abs + np.sqrt(1.0 - c**2 * (1.0 - uz**2))


def generate_dumbbell(neck_radius: float, subdivisions: int) -> TriSurface:
    """Two unit-sphere lobes joined by a smoothed neck, revolved about z.

    Built as a radial graph over the icosphere, so it is genus 0 whenever the
    radial map keeps every face positively oriented.
    """
    if not 0.0 < neck_radius < 1.0:
        raise ValueError(f"neck_radius must be in (0, 1), got {neck_radius}")
    v, f = _unit_icosphere(int(subdivisions))
    rho = dumbbell_radial_profile(v[:, 2], neck_radius)
    w = v * rho[:, None]
    p0, p1, p2 = (w[f[:, i]] for i in range(3))
    orient = np.einsum("ij,ij->i", np.cross(p1 - p0, p2 - p0), p0 + p1 + p2)
    if np.any(orient <= 0.0):
        raise MeshError("degenerate neck: radial map produced a negatively oriented face")
    meta = {
        "generator": "dumbbell",
        "neck_radius": float(neck_radius),
        "subdivisions": int(subdivisions),
        "profile": "rho(uz) = c*w*logcosh(uz/w) + sqrt(1 - c^2 (1 - uz^2)), c = sqrt(1 - neck^2)",
        "neck_width": DUMBBELL_NECK_WIDTH,
    }
    return TriSurface(w, f, meta)


def rescale_to_curvature_bound(surface: TriSurface, force: bool = False):
    """Scale positions by ``sqrt(K_min)`` so the rescaled surface has ``K_min = 1``.

    Returns ``(rescaled, scale_factor)``. If ``K_min <= 0`` a
    :class:`HypothesisViolation` is raised, unless ``force`` is set, in which
    case the surface is returned unchanged with ``scale_factor = 1``.
    """
    k_min = surface.curvature.K_min
    if k_min <= 0.0:
        if force:
            return surface, 1.0
        raise HypothesisViolation(f"K_min = {k_min:.4g} <= 0: curvature bound cannot be reached by scaling")
    s = float(np.sqrt(k_min))
    out = TriSurface(surface.vertices * s, surface.faces, dict(surface.meta))
    return out, s


# --- OFF I/O ------------------------------------------------------------------


def load_off(path) -> TriSurface:
    """Read an ASCII OFF triangle mesh."""
    with open(path) as fh:
        lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(fh)]
    lines = [(n, ln) for n, ln in lines if ln]
    if not lines:
        raise MeshError("empty OFF file")
    n, head = lines[0]
    rest = lines[1:]
    if head == "OFF":
        if not rest:
            raise MeshError(f"line {n}: missing counts")
        n, counts = rest[0]
        rest = rest[1:]
    elif head.startswith("OFF"):
        counts = head[3:]
    else:
        raise MeshError(f"line {n}: expected 'OFF' header")
    try:
        nv, nf = (int(x) for x in counts.split()[:2])
    except ValueError:
        raise MeshError(f"line {n}: bad vertex/face counts") from None
    if len(rest) < nv + nf:
        raise MeshError(f"line {rest[-1][0] if rest else n}: file truncated")
    verts = np.empty((nv, 3))
    for j in range(nv):
        ln_no, ln = rest[j]
        try:
            verts[j] = [float(x) for x in ln.split()[:3]]
        except ValueError:
            raise MeshError(f"line {ln_no}: bad vertex") from None
    faces = np.empty((nf, 3), dtype=np.int64)
    for j in range(nf):
        ln_no, ln = rest[nv + j]
        parts = ln.split()
        try:
            if int(parts[0]) != 3 or len(parts) < 4:
                raise MeshError(f"line {ln_no}: only triangles are supported")
            faces[j] = [int(x) for x in parts[1:4]]
        except ValueError:
            raise MeshError(f"line {ln_no}: bad face") from None
    return TriSurface(verts, faces, {"source": os.fspath(path)})


def off_text(surface: TriSurface, comments=()) -> str:
    """ASCII OFF text; floats use ``repr`` so reloads are exact.

    ``comments`` are written as ``# ...`` lines after the header.
    """
    out = ["OFF"] + [f"# {c}" for c in comments]
    out.append(f"{surface.n_vertices} {surface.n_faces} 0")
    out += [" ".join(repr(float(x)) for x in p) for p in surface.vertices]
    out += [f"3 {a} {b} {c}" for a, b, c in surface.faces]
    return "\n".join(out) + "\n"


def save_off(surface: TriSurface, path, comments=()) -> None:
    """Write ``surface`` to ``path`` as ASCII OFF (atomically)."""
    write_atomic(path, off_text(surface, comments))


def write_atomic(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
