"""Tetrahedral meshes: adjacency, voxel tetrahedralization, piece surfaces."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .surface import MeshError, SurfaceMesh

# Local face i is opposite corner i, ordered outward for a positive tet.
TET_FACES = np.array([(1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)], dtype=np.int64)


@dataclass
class TetMesh:
    vertices: np.ndarray  # (n, 3) float64
    tets: np.ndarray      # (m, 4) int64, positive signed volume

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.tets = np.ascontiguousarray(self.tets, dtype=np.int64)
        if self.tets.ndim != 2 or self.tets.shape[1] != 4:
            raise MeshError("tets must be (m, 4)")
        if len(self.tets) and (self.tets.min() < 0 or self.tets.max() >= len(self.vertices)):
            raise MeshError("tet index out of range")
        if len(self.tets) and (tet_volumes(self) <= 0.0).any():
            raise MeshError("tet with non-positive volume")

    @property
    def n(self):
        return len(self.vertices)

    @property
    def m(self):
        return len(self.tets)


def tet_volumes(mesh):
    p = mesh.vertices[mesh.tets]
    return np.einsum(
        "ij,ij->i", p[:, 1] - p[:, 0], np.cross(p[:, 2] - p[:, 0], p[:, 3] - p[:, 0])
    ) / 6.0


@dataclass
class FaceAdjacency:
    """Interior faces of a tet mesh with per-side corner correspondence.

    corner_a[f] / corner_b[f] hold local corner indices (0..3) into the two
    incident tets, aligned so position i on both sides refers to the same
    geometric vertex (ascending global vertex id).
    """

    tet_a: np.ndarray     # (F,)
    tet_b: np.ndarray     # (F,)
    corner_a: np.ndarray  # (F, 3)
    corner_b: np.ndarray  # (F, 3)
    areas: np.ndarray     # (F,)
    n_boundary_faces: int

    @property
    def n_faces(self):
        return len(self.tet_a)


def _face_map(mesh):
    """sorted vertex triple -> list of (tet, local_face)."""
    faces = {}
    tets = mesh.tets
    for t in range(len(tets)):
        for lf in range(4):
            key = tuple(sorted(tets[t, TET_FACES[lf]].tolist()))
            faces.setdefault(key, []).append((t, lf))
    return faces


def tet_adjacency(mesh):
    """Build the interior-face adjacency; boundary faces are excluded."""
    faces = _face_map(mesh)
    keys = sorted(faces)
    tet_a, tet_b, corner_a, corner_b, areas = [], [], [], [], []
    n_boundary = 0
    for key in keys:
        inc = faces[key]
        if len(inc) == 1:
            n_boundary += 1
            continue
        if len(inc) > 2:
            raise MeshError(f"non-manifold face {key} shared by {len(inc)} tets")
        (ta, _), (tb, _) = inc
        tet_a.append(ta)
        tet_b.append(tb)
        ca = [int(np.nonzero(mesh.tets[ta] == g)[0][0]) for g in key]
        cb = [int(np.nonzero(mesh.tets[tb] == g)[0][0]) for g in key]
        corner_a.append(ca)
        corner_b.append(cb)
        p = mesh.vertices[list(key)]
        areas.append(0.5 * np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0])))
    return FaceAdjacency(
        tet_a=np.asarray(tet_a, dtype=np.int64).reshape(-1),
        tet_b=np.asarray(tet_b, dtype=np.int64).reshape(-1),
        corner_a=np.asarray(corner_a, dtype=np.int64).reshape(-1, 3),
        corner_b=np.asarray(corner_b, dtype=np.int64).reshape(-1, 3),
        areas=np.asarray(areas, dtype=np.float64).reshape(-1),
        n_boundary_faces=n_boundary,
    )


def boundary_vertex_ids(mesh):
    """Vertex ids on the mesh boundary (faces owned by a single tet)."""
    faces = _face_map(mesh)
    ids = sorted({g for key, inc in faces.items() if len(inc) == 1 for g in key})
    return np.asarray(ids, dtype=np.int64)


def tet_component_labels(mesh, adjacency=None):
    """Connected-component label per tet under shared-face adjacency."""
    if adjacency is None:
        adjacency = tet_adjacency(mesh)
    m = mesh.m
    if m == 0:
        return 0, np.empty(0, dtype=np.int64)
    graph = sp.coo_matrix(
        (np.ones(len(adjacency.tet_a)), (adjacency.tet_a, adjacency.tet_b)), shape=(m, m)
    )
    n_comp, labels = connected_components(graph, directed=False)
    return n_comp, labels


# 5-tet split of a cube, corners indexed by (dx, dy, dz) bit offsets.
_CUBE_CORNERS = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
_A, _B, _C, _D, _E, _F, _G, _H = range(8)
_EVEN_TETS = [(_B, _D, _E, _G), (_A, _B, _D, _E), (_C, _B, _D, _G), (_F, _B, _E, _G), (_H, _D, _E, _G)]
_ODD_TETS = [(_A, _C, _F, _H), (_B, _A, _C, _F), (_D, _A, _C, _H), (_E, _A, _F, _H), (_G, _C, _F, _H)]


def tetrahedralize_voxels(grid, iso_offset):
    """5-tet split of every grid cell whose center signed distance is below
    iso_offset; parity alternation keeps shared faces compatible.

    Raises when the selected cells form more than one face-connected
    component (the component sizes are reported).
    """
    if iso_offset < grid.spacing:
        raise ValueError("iso_offset must be at least one grid spacing")
    vals = grid.values
    centers = (
        vals[:-1, :-1, :-1] + vals[1:, :-1, :-1] + vals[:-1, 1:, :-1] + vals[:-1, :-1, 1:]
        + vals[1:, 1:, :-1] + vals[1:, :-1, 1:] + vals[:-1, 1:, 1:] + vals[1:, 1:, 1:]
    ) / 8.0
    cells = np.argwhere(centers < iso_offset)
    if len(cells) == 0:
        raise MeshError("no interior cells below iso_offset")

    nx, ny, nz = grid.dims
    corner_ids = np.empty((len(cells), 8), dtype=np.int64)
    for c, (dx, dy, dz) in enumerate(_CUBE_CORNERS):
        corner_ids[:, c] = (
            (cells[:, 0] + dx) * (ny * nz) + (cells[:, 1] + dy) * nz + (cells[:, 2] + dz)
        )

    parity = (cells.sum(axis=1)) % 2
    tets_lattice = np.empty((len(cells), 5, 4), dtype=np.int64)
    even = np.asarray(_EVEN_TETS)
    odd = np.asarray(_ODD_TETS)
    tets_lattice[parity == 0] = corner_ids[parity == 0][:, even]
    tets_lattice[parity == 1] = corner_ids[parity == 1][:, odd]
    tets_lattice = tets_lattice.reshape(-1, 4)

    used, tets = np.unique(tets_lattice, return_inverse=True)
    tets = tets.reshape(-1, 4)
    li = used // (ny * nz)
    lj = (used // nz) % ny
    lk = used % nz
    verts = grid.origin + grid.spacing * np.stack([li, lj, lk], axis=1).astype(np.float64)

    from .meshio import fix_tet_orientation

    mesh = TetMesh(verts, fix_tet_orientation(verts, tets))
    n_comp, labels = tet_component_labels(mesh)
    if n_comp != 1:
        sizes = np.bincount(labels).tolist()
        raise MeshError(f"disconnected interior: {n_comp} components with sizes {sizes}")
    return mesh


def extract_piece_surfaces(mesh, labels):
    """Boundary surface of each label class, outward-oriented, with piece
    vertices re-indexed in ascending original order.

    Every label class must be face-connected.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (mesh.m,):
        raise ValueError("labels must cover all tets")
    faces = _face_map(mesh)
    n_pieces = int(labels.max()) + 1 if len(labels) else 0

    piece_faces = [[] for _ in range(n_pieces)]
    for t in range(mesh.m):
        lab = labels[t]
        for lf in range(4):
            tri = mesh.tets[t, TET_FACES[lf]]
            inc = faces[tuple(sorted(tri.tolist()))]
            if len(inc) == 2:
                other = inc[0][0] if inc[0][0] != t else inc[1][0]
                if labels[other] == lab:
                    continue
            piece_faces[lab].append(tri)

    out = []
    for lab in range(n_pieces):
        tris = np.asarray(piece_faces[lab], dtype=np.int64).reshape(-1, 3)
        class_tets = np.flatnonzero(labels == lab)
        if len(class_tets) == 0:
            raise ValueError(f"label {lab} has no tets")
        _assert_class_connected(mesh, faces, class_tets, lab)
        used = np.unique(tris)  # ascending original index
        remap = np.empty(mesh.n, dtype=np.int64)
        remap[used] = np.arange(len(used))
        out.append(SurfaceMesh(mesh.vertices[used], remap[tris]))
    return out


def _assert_class_connected(mesh, face_map, class_tets, lab):
    local = {int(t): i for i, t in enumerate(class_tets)}
    rows, cols = [], []
    for inc in face_map.values():
        if len(inc) == 2:
            (ta, _), (tb, _) = inc
            if ta in local and tb in local:
                rows.append(local[ta])
                cols.append(local[tb])
    k = len(class_tets)
    graph = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(k, k))
    n_comp, _ = connected_components(graph, directed=False)
    if n_comp != 1:
        raise MeshError(f"label class {lab} is not face-connected ({n_comp} components)")
