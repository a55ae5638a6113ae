"""Triangle surface meshes and unit-box normalization."""

from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    """Invalid mesh topology or geometry."""


@dataclass
class SurfaceMesh:
    vertices: np.ndarray  # (n, 3) float64
    faces: np.ndarray     # (f, 3) int64, CCW outward

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be (n, 3)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshError("faces must be (f, 3)")
        if len(self.faces) and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise MeshError("face index out of range")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)


def face_areas(mesh):
    tri = mesh.vertices[mesh.faces]
    return 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)


def face_normals(mesh):
    tri = mesh.vertices[mesh.faces]
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    lens = np.linalg.norm(n, axis=1)
    return n / np.where(lens > 0.0, lens, 1.0)[:, None]


def signed_volume(mesh):
    """Enclosed volume of a closed, outward-oriented surface (divergence theorem)."""
    tri = mesh.vertices[mesh.faces]
    return float(np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0)


def bounding_box(vertices):
    return vertices.min(axis=0), vertices.max(axis=0)


def is_watertight(mesh):
    """True when every undirected edge is shared by exactly two opposing half-edges."""
    f = mesh.faces
    half = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    fwd = set(map(tuple, half.tolist()))
    if len(fwd) != len(half):
        return False
    return all((b, a) in fwd for a, b in fwd)


@dataclass
class BoxTransform:
    """Uniform map taking original coordinates to normalized ones:
    normalized = original * scale + offset."""

    scale: float = 1.0
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def to_normalized(self, points):
        return points * self.scale + self.offset

    def to_original(self, points):
        return (points - self.offset) / self.scale

    @property
    def is_identity(self):
        return self.scale == 1.0 and not self.offset.any()


def normalize_to_unit_box(mesh):
    """Rescale so the axis-aligned bounding box has longest side exactly 1,
    centered at the origin.

    Iterates the centering/scaling step until the bounding box is an exact
    fixed point, which makes the operation exactly idempotent: a mesh that
    already satisfies the property is returned unchanged with an identity
    transform.
    """
    if len(mesh.vertices) == 0:
        raise MeshError("empty mesh")
    verts = mesh.vertices
    # inverse accumulators: original = u * inv_scale + inv_offset
    inv_scale = 1.0
    inv_offset = np.zeros(3)
    for _ in range(64):
        mn = verts.min(axis=0)
        mx = verts.max(axis=0)
        d = float((mx - mn).max())
        if d <= 0.0:
            raise MeshError("degenerate mesh: all vertices coincident")
        c = (mn + mx) / 2.0
        if d == 1.0 and not c.any():
            break
        verts = (verts - c) / d
        inv_offset = inv_offset + inv_scale * c
        inv_scale = inv_scale * d
    else:
        raise MeshError("unit-box normalization did not converge")
    if verts is mesh.vertices:
        return mesh, BoxTransform()
    transform = BoxTransform(scale=1.0 / inv_scale, offset=-inv_offset / inv_scale)
    return SurfaceMesh(verts, mesh.faces), transform
