"""Backend equivalence and brute-force oracles for the hot kernels."""

import numpy as np
import pytest

from fracturekit import kernels
from fracturekit.kernels import get_backends

from conftest import make_cube, make_icosphere
from oracles import brute_force_nearest_sq

BACKENDS = sorted(get_backends().items())


def brute_point_mesh_sq(points, V, F):
    from fracturekit.kernels.reference import point_triangle_sq_distance

    best = np.full(len(points), np.inf)
    for f in F:
        tri = V[f]
        d2 = point_triangle_sq_distance(
            points,
            np.broadcast_to(tri[0], points.shape),
            np.broadcast_to(tri[1], points.shape),
            np.broadcast_to(tri[2], points.shape),
        )
        best = np.minimum(best, d2)
    return best


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_point_mesh_distance_matches_brute_force(name, impl):
    sphere = make_icosphere(radius=0.4, subdivisions=1)
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.0, 1.0, size=(400, 3))
    expected = brute_point_mesh_sq(pts, sphere.vertices, sphere.faces)
    got = impl.point_mesh_sq_distance(pts, sphere.vertices, sphere.faces)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_points_inside_cube(name, impl):
    cube = make_cube()
    rng = np.random.default_rng(8)
    pts = rng.uniform(-0.9, 0.9, size=(600, 3))
    inside = impl.points_inside_mesh(pts, cube.vertices, cube.faces)
    truth = np.all(np.abs(pts) < 0.5, axis=1)
    np.testing.assert_array_equal(inside, truth)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_grid_inside_mask_cube_exact(name, impl):
    cube = make_cube()
    h = 1.0 / 11.0
    origin = np.full(3, -0.5 - 2.5 * h)
    dims = (17, 17, 17)
    mask = impl.grid_inside_mask(origin, h, dims, cube.vertices, cube.faces)
    axes = origin[0] + h * np.arange(17)
    gx, gy, gz = np.meshgrid(axes, axes, axes, indexing="ij")
    truth = (np.abs(gx) < 0.5) & (np.abs(gy) < 0.5) & (np.abs(gz) < 0.5)
    np.testing.assert_array_equal(mask, truth)


def test_grid_inside_mask_backends_agree_on_sphere():
    backends = get_backends()
    if len(backends) < 2:
        pytest.skip("compiled backend not built")
    sphere = make_icosphere(radius=0.43, subdivisions=2)
    h = 0.05
    origin = np.full(3, -0.55)
    dims = (23, 23, 23)
    masks = [
        impl.grid_inside_mask(origin, h, dims, sphere.vertices, sphere.faces)
        for _, impl in sorted(backends.items())
    ]
    np.testing.assert_array_equal(masks[0], masks[1])


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_nearest_sq_dists_matches_brute_force(name, impl):
    rng = np.random.default_rng(9)
    p = rng.normal(size=(150, 3))
    q = rng.normal(size=(220, 3))
    got = impl.nearest_sq_dists(p, q)
    np.testing.assert_allclose(got, brute_force_nearest_sq(p, q), rtol=0, atol=1e-12)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_segment_crossings_cube(name, impl):
    cube = make_cube()
    starts = np.array([[0.0, 0.1, 0.03], [-1.0, 0.1, 0.03], [-1.0, 0.7, 0.03], [0.1, 0.1, 0.1]])
    ends = np.array([[2.0, 0.1, 0.03], [1.0, 0.1, 0.03], [1.0, 0.7, 0.03], [0.2, 0.15, 0.11]])
    got = impl.segment_mesh_crossings(starts, ends, cube.vertices, cube.faces)
    np.testing.assert_array_equal(got, [1, 2, 0, 0])


def test_backend_name_reported():
    assert kernels.BACKEND in ("python", "native")
