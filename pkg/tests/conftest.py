import numpy as np
import pytest

from fracturekit.geom import SurfaceMesh, TetMesh, fix_tet_orientation

CUBE_QUADS = [
    (0, 1, 3, 2),  # x = -s
    (4, 6, 7, 5),  # x = +s
    (0, 4, 5, 1),  # y = -s
    (2, 3, 7, 6),  # y = +s
    (0, 2, 6, 4),  # z = -s
    (1, 5, 7, 3),  # z = +s
]


def make_cube(side=1.0, center=(0.0, 0.0, 0.0)):
    """Outward-oriented cube surface (12 triangles)."""
    s = side / 2.0
    verts = np.array(
        [[x, y, z] for x in (-s, s) for y in (-s, s) for z in (-s, s)], dtype=np.float64
    ) + np.asarray(center, dtype=np.float64)
    faces = []
    for a, b, c, d in CUBE_QUADS:
        faces.append((a, b, c))
        faces.append((a, c, d))
    return SurfaceMesh(verts, np.asarray(faces, dtype=np.int64))


def make_icosphere(radius=0.5, subdivisions=2, center=(0.0, 0.0, 0.0)):
    """Subdivided icosahedron projected to a sphere, outward-oriented."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=np.float64,
    )
    faces = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=np.int64,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    for _ in range(subdivisions):
        edge_mid = {}
        new_faces = []
        vert_list = [v for v in verts]

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in edge_mid:
                m = vert_list[i] + vert_list[j]
                m /= np.linalg.norm(m)
                edge_mid[key] = len(vert_list)
                vert_list.append(m)
            return edge_mid[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        verts = np.asarray(vert_list)
        faces = np.asarray(new_faces, dtype=np.int64)
    return SurfaceMesh(radius * verts + np.asarray(center, dtype=np.float64), faces)


def make_single_tet():
    verts = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=np.float64
    )
    return TetMesh(verts, np.array([[0, 1, 2, 3]], dtype=np.int64))


def make_two_tets():
    """Two tets glued on the (0,1,2) face."""
    verts = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0.3, 0.3, -0.9]],
        dtype=np.float64,
    )
    tets = fix_tet_orientation(verts, np.array([[0, 1, 2, 3], [0, 2, 1, 4]]))
    return TetMesh(verts, tets)


def make_five_tet_cube():
    """Unit cube split into 5 tets (central + 4 corners)."""
    verts = np.array(
        [[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)]
    )
    # corner ids: bits (x, y, z) -> index 4x + 2y + z
    A, B, C, D = 0, 4, 6, 2
    E, F, G, H = 1, 5, 7, 3
    raw = np.array(
        [(B, D, E, G), (A, B, D, E), (C, B, D, G), (F, B, E, G), (H, D, E, G)]
    )
    return TetMesh(verts, fix_tet_orientation(verts, raw))


@pytest.fixture
def cube():
    return make_cube()


@pytest.fixture
def sphere():
    return make_icosphere()


@pytest.fixture
def single_tet():
    return make_single_tet()


@pytest.fixture
def two_tets():
    return make_two_tets()


@pytest.fixture
def five_tet_cube():
    return make_five_tet_cube()
