import numpy as np
import pytest

from fracturekit import kernels
from fracturekit.geom import (
    MeshError,
    extract_cage,
    signed_volume,
    tet_volumes,
    tetrahedralize_voxels,
    voxelize_sdf,
)

from conftest import make_cube, make_icosphere
from oracles import det_tet_volumes


def grid_value_at(grid, point):
    idx = np.rint((np.asarray(point) - grid.origin) / grid.spacing).astype(int)
    return grid.values[tuple(idx)]


def test_sphere_center_value():
    sphere = make_icosphere(radius=0.5, subdivisions=3)
    grid = voxelize_sdf(sphere, 16)
    center = grid.origin + grid.spacing * (np.asarray(grid.dims) - 1) / 2.0
    d2 = kernels.point_mesh_sq_distance(center[None, :], sphere.vertices, sphere.faces)
    # value at the sample nearest the center is about -0.5, within a cell
    i = np.rint((np.zeros(3) - grid.origin) / grid.spacing).astype(int)
    val = grid.values[tuple(i)]
    assert val < 0
    assert abs(val + 0.5) < grid.spacing


def test_outside_samples_positive_distance():
    sphere = make_icosphere(radius=0.5, subdivisions=2)
    grid = voxelize_sdf(sphere, 12)
    corner_val = grid.values[0, 0, 0]
    corner = grid.origin
    dist = np.linalg.norm(corner) - 0.5  # sphere radius
    assert corner_val > 0
    assert corner_val == pytest.approx(dist, rel=0.05)


def test_grid_n_too_small_rejected(cube):
    with pytest.raises(ValueError, match="at least 8"):
        voxelize_sdf(cube, 4)


def test_non_watertight_warns(cube):
    from fracturekit.geom import SurfaceMesh

    open_mesh = SurfaceMesh(cube.vertices, cube.faces[:-1])
    with pytest.warns(UserWarning, match="not watertight"):
        voxelize_sdf(open_mesh, 8)


def test_cage_contains_sphere():
    sphere = make_icosphere(radius=0.4, subdivisions=2)
    grid = voxelize_sdf(sphere, 20)
    cage = extract_cage(grid, 0.05)
    inside = kernels.points_inside_mesh(sphere.vertices, cage.vertices, cage.faces)
    assert inside.all()
    # cage of a sphere at offset 0.05 is roughly a sphere of radius 0.45
    assert signed_volume(cage) == pytest.approx(4.0 / 3.0 * np.pi * 0.45**3, rel=0.1)


def test_cage_contains_cube(cube):
    grid = voxelize_sdf(cube, 16)
    cage = extract_cage(grid, grid.spacing)
    inside = kernels.points_inside_mesh(cube.vertices, cage.vertices, cage.faces)
    assert inside.all()


def test_cage_offset_out_of_range(cube):
    grid = voxelize_sdf(cube, 16)
    with pytest.raises(MeshError, match="empty isosurface"):
        extract_cage(grid, 10.0)


def test_cage_offset_below_spacing_rejected(cube):
    grid = voxelize_sdf(cube, 16)
    with pytest.raises(ValueError, match="grid spacing"):
        extract_cage(grid, 0.1 * grid.spacing)


def test_2x2x2_interior_cells_give_40_tets():
    # hand-built grid: central 3x3x3 lattice block negative, so exactly the
    # central 2x2x2 cells have all-corner (hence center) values below level
    from fracturekit.geom import ScalarGrid

    values = np.full((5, 5, 5), 3.0)
    values[1:4, 1:4, 1:4] = -1.0
    grid = ScalarGrid(np.zeros(3), 0.5, values)
    mesh = tetrahedralize_voxels(grid, 0.5)
    assert mesh.m == 40
    vols = tet_volumes(mesh)
    assert (vols > 0).all()
    np.testing.assert_allclose(det_tet_volumes(mesh), vols, rtol=1e-10)
    # 8 cells of side 0.5
    assert vols.sum() == pytest.approx(8 * 0.125)


def test_voxel_tets_match_cell_count(cube):
    grid = voxelize_sdf(cube, 8)
    mesh = tetrahedralize_voxels(grid, grid.spacing)
    centers = (
        grid.values[:-1, :-1, :-1] + grid.values[1:, :-1, :-1] + grid.values[:-1, 1:, :-1]
        + grid.values[:-1, :-1, 1:] + grid.values[1:, 1:, :-1] + grid.values[1:, :-1, 1:]
        + grid.values[:-1, 1:, 1:] + grid.values[1:, 1:, 1:]
    ) / 8.0
    n_cells = int((centers < grid.spacing).sum())
    assert mesh.m == 5 * n_cells
    assert (tet_volumes(mesh) > 0).all()


def test_sphere_tet_volume_within_10_percent():
    sphere = make_icosphere(radius=0.45, subdivisions=3)
    grid = voxelize_sdf(sphere, 64)
    mesh = tetrahedralize_voxels(grid, grid.spacing)
    total = tet_volumes(mesh).sum()
    analytic = 4.0 / 3.0 * np.pi * 0.45**3
    assert abs(total - analytic) / analytic < 0.10


def test_two_disjoint_spheres_disconnected():
    a = make_icosphere(radius=0.2, subdivisions=1, center=(-0.5, 0, 0))
    b = make_icosphere(radius=0.2, subdivisions=1, center=(0.5, 0, 0))
    from fracturekit.geom import SurfaceMesh

    verts = np.concatenate([a.vertices, b.vertices])
    faces = np.concatenate([a.faces, b.faces + a.n_vertices])
    grid = voxelize_sdf(SurfaceMesh(verts, faces), 24)
    with pytest.raises(MeshError, match="disconnected"):
        tetrahedralize_voxels(grid, grid.spacing)
