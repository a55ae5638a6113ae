import numpy as np
import pytest

from fracturekit.geom import (
    MeshParseError,
    load_surface_mesh,
    load_tet_mesh,
    save_surface_mesh,
)

from conftest import make_cube


def test_single_triangle_obj(tmp_path):
    path = tmp_path / "tri.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    mesh = load_surface_mesh(path)
    assert mesh.n_vertices == 3
    assert mesh.n_faces == 1


def test_cube_quads_fan_triangulated(tmp_path):
    # hand-constructed cube of 6 quads; fans give 12 triangles
    verts = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    quads = [
        (1, 2, 4, 3), (5, 7, 8, 6), (1, 5, 6, 2), (3, 4, 8, 7), (1, 3, 7, 5), (2, 6, 8, 4),
    ]
    lines = [f"v {x} {y} {z}" for x, y, z in verts]
    lines += [f"f {a} {b} {c} {d}" for a, b, c, d in quads]
    path = tmp_path / "cube.obj"
    path.write_text("\n".join(lines) + "\n")
    mesh = load_surface_mesh(path)
    assert mesh.n_vertices == 8
    assert mesh.n_faces == 12
    # fan rule: quad (a, b, c, d) -> (a, b, c), (a, c, d)
    np.testing.assert_array_equal(mesh.faces[0], [0, 1, 3])
    np.testing.assert_array_equal(mesh.faces[1], [0, 3, 2])


def test_zero_index_rejected_with_line_number(tmp_path):
    path = tmp_path / "bad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n")
    with pytest.raises(MeshParseError, match=r":4:"):
        load_surface_mesh(path)


def test_out_of_range_index(tmp_path):
    path = tmp_path / "bad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")
    with pytest.raises(MeshParseError, match="out of range"):
        load_surface_mesh(path)


def test_face_with_slashes_and_comments(tmp_path):
    path = tmp_path / "t.obj"
    path.write_text(
        "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\nf 1/1/1 2/1/1 3/1/1\n"
    )
    mesh = load_surface_mesh(path)
    assert mesh.n_faces == 1


def test_negative_relative_indices(tmp_path):
    path = tmp_path / "t.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
    mesh = load_surface_mesh(path)
    np.testing.assert_array_equal(mesh.faces[0], [0, 1, 2])


def test_obj_roundtrip_bit_exact(tmp_path):
    cube = make_cube(side=1.0 / 3.0, center=(0.1, -0.2, 0.7))
    path = tmp_path / "c.obj"
    save_surface_mesh(path, cube)
    back = load_surface_mesh(path)
    np.testing.assert_array_equal(back.vertices, cube.vertices)
    np.testing.assert_array_equal(back.faces, cube.faces)


def test_degenerate_faces_dropped(tmp_path):
    path = tmp_path / "d.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nf 1 1 2\nf 1 2 2\n")
    mesh = load_surface_mesh(path)
    assert mesh.n_faces == 1


def test_node_ele_single_tet(tmp_path):
    (tmp_path / "t.node").write_text(
        "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n"
    )
    (tmp_path / "t.ele").write_text("1 4 0\n1 1 2 3 4\n")
    mesh = load_tet_mesh(tmp_path / "t.node")
    assert mesh.n == 4
    assert mesh.m == 1


def test_inverted_tet_reoriented(tmp_path):
    (tmp_path / "t.node").write_text(
        "4 3 0 0\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n"
    )
    (tmp_path / "t.ele").write_text("1 4 0\n1 0 2 1 3\n")  # negative orientation
    mesh = load_tet_mesh(tmp_path / "t.ele")
    from fracturekit.geom import tet_volumes

    assert (tet_volumes(mesh) > 0).all()


def test_ele_out_of_range_node(tmp_path):
    (tmp_path / "t.node").write_text(
        "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n"
    )
    (tmp_path / "t.ele").write_text("1 4 0\n1 1 2 3 99\n")
    with pytest.raises(MeshParseError, match="out of range"):
        load_tet_mesh(tmp_path / "t.node")


def test_medit_mesh(tmp_path):
    (tmp_path / "t.mesh").write_text(
        "MeshVersionFormatted 1\nDimension 3\nVertices\n4\n"
        "0 0 0 0\n1 0 0 0\n0 1 0 0\n0 0 1 0\n"
        "Tetrahedra\n1\n1 2 3 4 0\nEnd\n"
    )
    mesh = load_tet_mesh(tmp_path / "t.mesh")
    assert mesh.n == 4
    assert mesh.m == 1
