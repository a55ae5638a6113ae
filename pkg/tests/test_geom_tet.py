from collections import Counter

import numpy as np
import pytest

from fracturekit.geom import (
    MeshError,
    TET_FACES,
    TetMesh,
    boundary_vertex_ids,
    extract_piece_surfaces,
    signed_volume,
    tet_adjacency,
    tet_volumes,
    tetrahedralize_voxels,
    voxelize_sdf,
)

from conftest import make_cube, make_five_tet_cube, make_single_tet, make_two_tets
from oracles import det_tet_volumes


def face_multiset(mesh):
    faces = Counter()
    for tet in mesh.tets:
        for lf in TET_FACES:
            faces[tuple(sorted(tet[list(lf)].tolist()))] += 1
    return faces


def test_two_tets_one_interior_face(two_tets):
    adj = tet_adjacency(two_tets)
    assert adj.n_faces == 1
    assert adj.areas[0] == pytest.approx(0.5)
    # corner correspondence references the same geometric vertices
    ga = two_tets.tets[adj.tet_a[0], adj.corner_a[0]]
    gb = two_tets.tets[adj.tet_b[0], adj.corner_b[0]]
    np.testing.assert_array_equal(ga, gb)


def test_single_tet_no_interior_faces(single_tet):
    adj = tet_adjacency(single_tet)
    assert adj.n_faces == 0
    assert adj.n_boundary_faces == 4


def test_five_tet_cube_interior_faces(five_tet_cube):
    # enumeration oracle: faces appearing twice in the face multiset
    counts = face_multiset(five_tet_cube)
    expected_interior = sum(1 for c in counts.values() if c == 2)
    adj = tet_adjacency(five_tet_cube)
    assert adj.n_faces == expected_interior
    assert adj.n_faces == 4  # the 4 faces of the central tet
    assert 4 * five_tet_cube.m == 2 * adj.n_faces + adj.n_boundary_faces


def test_handshake_identity_on_voxel_mesh(cube):
    grid = voxelize_sdf(cube, 9)
    mesh = tetrahedralize_voxels(grid, grid.spacing)
    adj = tet_adjacency(mesh)
    assert 4 * mesh.m == 2 * adj.n_faces + adj.n_boundary_faces


def test_non_manifold_face_rejected():
    verts = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0.3, 0.3, -1.0], [1.0, 1.0, 0.5]],
        dtype=np.float64,
    )
    from fracturekit.geom import fix_tet_orientation

    tets = fix_tet_orientation(
        verts, np.array([[0, 1, 2, 3], [0, 2, 1, 4], [0, 1, 2, 5]])
    )
    with pytest.raises(MeshError, match="non-manifold"):
        tet_adjacency(TetMesh(verts, tets))


def test_boundary_vertices_two_tets(two_tets):
    # every vertex of the two-tet mesh is on the boundary
    np.testing.assert_array_equal(boundary_vertex_ids(two_tets), np.arange(5))


def test_all_tets_one_label_gives_mesh_boundary(five_tet_cube):
    pieces = extract_piece_surfaces(five_tet_cube, np.zeros(5, dtype=np.int64))
    assert len(pieces) == 1
    assert signed_volume(pieces[0]) == pytest.approx(1.0)
    counts = face_multiset(five_tet_cube)
    n_boundary = sum(1 for c in counts.values() if c == 1)
    assert pieces[0].n_faces == n_boundary


def test_two_labels_two_closed_tet_boundaries(two_tets):
    pieces = extract_piece_surfaces(two_tets, np.array([0, 1]))
    assert len(pieces) == 2
    for piece, vol in zip(pieces, det_tet_volumes(two_tets)):
        assert piece.n_faces == 4
        assert signed_volume(piece) == pytest.approx(vol, rel=1e-12)


def test_piece_volumes_conserved_and_face_multiset(cube):
    grid = voxelize_sdf(cube, 9)
    mesh = tetrahedralize_voxels(grid, grid.spacing)
    rng = np.random.default_rng(0)
    # split by a plane into two connected classes
    centroids = mesh.vertices[mesh.tets].mean(axis=1)
    labels = (centroids[:, 0] > 0.01).astype(np.int64)
    pieces = extract_piece_surfaces(mesh, labels)
    total = sum(signed_volume(p) for p in pieces)
    assert total == pytest.approx(float(tet_volumes(mesh).sum()), rel=1e-10)

    # multiset identity: piece boundary faces = mesh boundary + broken interior twice
    mesh_faces = face_multiset(mesh)
    boundary = {k for k, c in mesh_faces.items() if c == 1}
    adj = tet_adjacency(mesh)
    broken = {
        tuple(sorted(mesh.tets[adj.tet_a[f], adj.corner_a[f]].tolist()))
        for f in range(adj.n_faces)
        if labels[adj.tet_a[f]] != labels[adj.tet_b[f]]
    }
    coord_to_global = {tuple(v): i for i, v in enumerate(mesh.vertices.tolist())}
    got = Counter()
    for piece in pieces:
        gids = np.array([coord_to_global[tuple(v)] for v in piece.vertices.tolist()])
        for tri in piece.faces:
            got[tuple(sorted(gids[tri].tolist()))] += 1
    expected = Counter()
    for k in boundary:
        expected[k] += 1
    for k in broken:
        expected[k] += 2
    assert got == expected


def test_disconnected_label_class_rejected(five_tet_cube):
    # central tet is 0; two opposite corner tets labeled together are not
    # face-adjacent
    labels = np.array([0, 1, 0, 0, 1], dtype=np.int64)
    with pytest.raises(MeshError, match="not face-connected"):
        extract_piece_surfaces(five_tet_cube, labels)


def test_piece_vertices_ascending_original_order(two_tets):
    pieces = extract_piece_surfaces(two_tets, np.array([0, 1]))
    used0 = np.unique(two_tets.tets[0])
    np.testing.assert_array_equal(pieces[0].vertices, two_tets.vertices[used0])


def test_nonpositive_volume_rejected():
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=np.float64)
    with pytest.raises(MeshError, match="volume"):
        TetMesh(verts, np.array([[0, 2, 1, 3]]))
