"""Readers and writers for the supported mesh file formats.

OBJ support is deliberately minimal: v/f records only, quads and larger
polygons fan-triangulated, everything else ignored. Tet meshes load from
.node/.ele pairs (TetGen) or single .mesh files (MEDIT). All floats are
written with 17 significant digits so text round-trips are exact.
"""

import os

import numpy as np

from .surface import MeshError, SurfaceMesh
from .tet import TetMesh


class MeshParseError(MeshError):
    """Malformed mesh file; message carries file and line number."""


def _fmt(x):
    return format(float(x), ".17g")


def load_surface_mesh(path):
    """Load a triangle mesh from an OBJ file (v/f subset)."""
    vertices = []
    faces = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise MeshParseError(f"{path}:{lineno}: bad vertex coordinate: {exc}") from None
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshParseError(f"{path}:{lineno}: face needs at least 3 vertices")
                idx = []
                for token in parts[1:]:
                    head = token.split("/", 1)[0]
                    try:
                        raw_i = int(head)
                    except ValueError:
                        raise MeshParseError(f"{path}:{lineno}: bad face index {token!r}") from None
                    if raw_i == 0:
                        raise MeshParseError(f"{path}:{lineno}: OBJ face indices are 1-based, got 0")
                    i = raw_i - 1 if raw_i > 0 else len(vertices) + raw_i
                    if i < 0 or i >= len(vertices):
                        raise MeshParseError(f"{path}:{lineno}: face index {raw_i} out of range")
                    idx.append(i)
                for k in range(1, len(idx) - 1):
                    faces.append((idx[0], idx[k], idx[k + 1]))
            # normals, texcoords, groups, materials: ignored
    if not vertices:
        raise MeshParseError(f"{path}: no vertices found")
    verts = np.asarray(vertices, dtype=np.float64)
    tris = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    tris = _drop_degenerate(verts, tris)
    return SurfaceMesh(verts, tris)


def _drop_degenerate(verts, tris):
    """Remove exactly zero-area faces (repeated indices or collinear vertices)."""
    if len(tris) == 0:
        return tris
    repeated = (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2]) | (tris[:, 0] == tris[:, 2])
    tri = verts[tris]
    area2 = np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    return tris[~repeated & (area2 > 0.0)]


def obj_text(vertices, faces, group=None):
    lines = []
    if group is not None:
        lines.append(f"g {group}")
    for v in vertices:
        lines.append(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}")
    for f in faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    return "\n".join(lines) + "\n"


def save_surface_mesh(path, mesh):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(obj_text(mesh.vertices, mesh.faces))


def save_obj_groups(path, groups):
    """Write one OBJ with a named group per (name, vertices, faces) entry."""
    offset = 0
    chunks = []
    for name, verts, faces in groups:
        chunks.append(obj_text(verts, np.asarray(faces) + offset, group=name))
        offset += len(verts)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(chunks))


def _data_lines(path):
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def _load_node_ele(node_path, ele_path):
    lines = _data_lines(node_path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise MeshParseError(f"{node_path}: empty file") from None
    n = int(header.split()[0])
    coords = np.empty((n, 3))
    ids = np.empty(n, dtype=np.int64)
    for row in range(n):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshParseError(f"{node_path}: expected {n} nodes, got {row}") from None
        parts = line.split()
        ids[row] = int(parts[0])
        coords[row] = [float(parts[1]), float(parts[2]), float(parts[3])]
    base = int(ids[0])
    if not np.array_equal(ids, np.arange(base, base + n)):
        raise MeshParseError(f"{node_path}: node indices must be consecutive")

    lines = _data_lines(ele_path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise MeshParseError(f"{ele_path}: empty file") from None
    m = int(header.split()[0])
    tets = np.empty((m, 4), dtype=np.int64)
    for row in range(m):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshParseError(f"{ele_path}: expected {m} tets, got {row}") from None
        parts = line.split()
        tets[row] = [int(p) for p in parts[1:5]]
    tets -= base
    if tets.min() < 0 or tets.max() >= n:
        raise MeshParseError(f"{ele_path}: tet references node out of range")
    return coords, tets


def _load_medit(path):
    tokens = []
    for lineno, line in _data_lines(path):
        tokens.extend(line.split())
    coords = None
    tets = None
    i = 0
    while i < len(tokens):
        key = tokens[i].lower()
        if key == "vertices":
            n = int(tokens[i + 1])
            i += 2
            coords = np.array(
                [[float(tokens[i + 4 * r + c]) for c in range(3)] for r in range(n)]
            )
            i += 4 * n  # x y z ref
        elif key == "tetrahedra":
            m = int(tokens[i + 1])
            i += 2
            tets = np.array(
                [[int(tokens[i + 5 * r + c]) for c in range(4)] for r in range(m)],
                dtype=np.int64,
            )
            i += 5 * m  # a b c d ref
        elif key == "end":
            break
        else:
            i += 1
    if coords is None or tets is None:
        raise MeshParseError(f"{path}: missing Vertices or Tetrahedra section")
    tets -= 1
    if tets.min() < 0 or tets.max() >= len(coords):
        raise MeshParseError(f"{path}: tet references vertex out of range")
    return coords, tets


def load_tet_mesh(path):
    """Load a tetrahedral mesh from a .node/.ele pair or a MEDIT .mesh file.

    Tets listed with negative signed volume are reordered to positive.
    """
    root, ext = os.path.splitext(str(path))
    ext = ext.lower()
    if ext in (".node", ".ele"):
        coords, tets = _load_node_ele(root + ".node", root + ".ele")
    elif ext == ".mesh":
        coords, tets = _load_medit(path)
    else:
        raise MeshParseError(f"{path}: unsupported tet-mesh extension {ext!r}")
    tets = fix_tet_orientation(coords, tets)
    return TetMesh(coords, tets)


def fix_tet_orientation(coords, tets):
    """Swap two vertices of every negative-volume tet; reject flat tets."""
    tets = np.array(tets, dtype=np.int64, copy=True)
    p = coords[tets]
    vol6 = np.einsum(
        "ij,ij->i", p[:, 1] - p[:, 0], np.cross(p[:, 2] - p[:, 0], p[:, 3] - p[:, 0])
    )
    if (vol6 == 0.0).any():
        raise MeshError("tet with zero volume")
    neg = vol6 < 0.0
    tets[neg] = tets[neg][:, [0, 1, 3, 2]]
    return tets
