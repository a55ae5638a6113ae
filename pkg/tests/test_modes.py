import numpy as np
import pytest

from fracturekit.fem import Material, continuous_operators, lift_discontinuous
from fracturekit.geom import tet_adjacency
from fracturekit.modes import (
    SolverConfig,
    elastic_modes,
    fracture_modes,
    mode_fault_faces,
    rigid_motion_basis,
)

from conftest import make_five_tet_cube, make_two_tets
from oracles import brute_force_first_mode, dense_generalized_eigs


def build_discrete(mesh, material=None):
    ops = continuous_operators(mesh, material)
    adj = tet_adjacency(mesh)
    return ops, adj, lift_discontinuous(mesh, ops, adj)


def test_elastic_six_rigid_modes(five_tet_cube):
    ops = continuous_operators(five_tet_cube)
    res = elastic_modes(ops.mass, ops.stiffness, 8)
    scale = np.abs(ops.stiffness).sum()
    assert (res.eigenvalues[:6] <= 1e-8 * scale).all()
    assert res.eigenvalues[6] > 1e-6 * scale
    # residual check per column
    for c in range(8):
        r = ops.stiffness @ res.vectors[:, c] - res.eigenvalues[c] * (
            ops.mass @ res.vectors[:, c]
        )
        assert np.linalg.norm(r) <= 1e-6 * scale


def test_elastic_matches_dense_oracle(five_tet_cube):
    ops = continuous_operators(five_tet_cube)
    res = elastic_modes(ops.mass, ops.stiffness, 10)
    expected = dense_generalized_eigs(ops.stiffness, ops.mass, 10)
    scale = max(abs(expected[-1]), 1e-30)
    np.testing.assert_allclose(res.eigenvalues, np.maximum(expected, 0.0),
                               rtol=1e-6, atol=1e-6 * scale)


def test_elastic_orthonormality(five_tet_cube):
    ops = continuous_operators(five_tet_cube)
    res = elastic_modes(ops.mass, ops.stiffness, 7)
    gram = res.vectors.T @ (ops.mass @ res.vectors)
    assert np.abs(gram - np.eye(7)).max() < 1e-8


def test_rigid_basis_orthonormal_and_in_null_space(two_tets):
    _, _, dops = build_discrete(two_tets)
    basis = rigid_motion_basis(dops)
    gram = basis.T @ (dops.mass @ basis)
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-10)
    # rigid motions have zero elastic energy and zero jumps
    for c in range(6):
        v = basis[:, c]
        assert abs(v @ (dops.stiffness @ v)) < 1e-10
        assert np.abs(dops.jump @ v).max() < 1e-10


def test_two_tet_first_mode_matches_brute_force(two_tets):
    _, adj, dops = build_discrete(two_tets)
    cfg = SolverConfig(k=1, seed=3, max_iters=2000, tol_rel=1e-10)
    fm = fracture_modes(dops, cfg)
    oracle = brute_force_first_mode(dops, rigid_motion_basis(dops), cfg.omega, n_starts=100)
    assert fm.objectives[0] == pytest.approx(oracle, rel=0.01)
    # the mode separates the tets across the single interior face
    faults = mode_fault_faces(fm, 1e-3)
    np.testing.assert_array_equal(faults[0], [0])


def test_two_tet_mode_piecewise_rigid_with_stiff_material(two_tets):
    # with a stiff material the optimum's elastic remainder drops below 1e-8
    _, adj, dops = build_discrete(two_tets, Material(youngs=100.0))
    fm = fracture_modes(dops, SolverConfig(k=1, seed=3, max_iters=2000, tol_rel=1e-10))
    u = fm.vectors[:, 0]
    assert 0.5 * float(u @ (dops.stiffness @ u)) <= 1e-8
    assert mode_fault_faces(fm, 1e-3)[0].tolist() == [0]


def test_mode_constraints_and_ordering(five_tet_cube):
    _, _, dops = build_discrete(five_tet_cube)
    fm = fracture_modes(dops, SolverConfig(k=4, seed=5))
    gram = fm.vectors.T @ (dops.mass @ fm.vectors)
    assert np.abs(gram - np.eye(4)).max() < 1e-6
    rigid = rigid_motion_basis(dops)
    overlap = rigid.T @ (dops.mass @ fm.vectors)
    assert np.abs(overlap).max() < 1e-6
    assert (np.diff(fm.objectives) >= -1e-12).all()


def test_objective_histories_monotone(five_tet_cube):
    _, _, dops = build_discrete(five_tet_cube)
    fm = fracture_modes(dops, SolverConfig(k=3, seed=5))
    for history in fm.histories:
        assert (np.diff(history) <= 1e-12).all()


def test_omega_insensitivity_two_and_five_tets(two_tets, five_tet_cube):
    for mesh, k in ((two_tets, 5), (five_tet_cube, 5)):
        _, _, dops = build_discrete(mesh)
        faults = []
        for omega in (1e-3, 1e-4):
            fm = fracture_modes(
                dops, SolverConfig(k=k, omega=omega, seed=7, max_iters=2000, tol_rel=1e-9)
            )
            faults.append([set(f.tolist()) for f in mode_fault_faces(fm, 1e-3)])
        assert faults[0] == faults[1]


def test_same_seed_reproducible(five_tet_cube):
    _, _, dops = build_discrete(five_tet_cube)
    a = fracture_modes(dops, SolverConfig(k=3, seed=21))
    b = fracture_modes(dops, SolverConfig(k=3, seed=21))
    np.testing.assert_array_equal(a.vectors, b.vectors)
    np.testing.assert_array_equal(a.objectives, b.objectives)


def test_k_exceeding_dimension_rejected(two_tets):
    _, _, dops = build_discrete(two_tets)
    with pytest.raises(ValueError, match="exceeds"):
        fracture_modes(dops, SolverConfig(k=19, seed=0))  # 24 - 6 = 18 available


def test_fault_faces_thresholds(two_tets):
    _, _, dops = build_discrete(two_tets)
    fm = fracture_modes(dops, SolverConfig(k=1, seed=3))
    assert mode_fault_faces(fm, np.inf)[0].size == 0
    with pytest.raises(ValueError):
        mode_fault_faces(fm, 0.0)


def test_invalid_configs():
    with pytest.raises(ValueError):
        SolverConfig(k=0)
    with pytest.raises(ValueError):
        SolverConfig(omega=0.0)
    with pytest.raises(ValueError):
        SolverConfig(tol_rel=-1.0)
