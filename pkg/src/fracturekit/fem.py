"""Linear-tet FEM operators and their discontinuous per-corner lifts.

The continuous operators are the classic 3n x 3n mass and small-strain
elastic stiffness. The discontinuous versions live on a 12m corner space
(3 components x 4 corners x m tets) where the same element matrices sit
unassembled on the block diagonal; inter-element continuity is measured by
per-face jump maps and an area-weighted group-L2 discontinuity energy.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geom import tet_volumes


@dataclass
class Material:
    youngs: float = 1.0
    poisson: float = 0.3
    density: float = 1.0

    def __post_init__(self):
        if self.youngs <= 0.0:
            raise ValueError("Young's modulus must be positive")
        if not 0.0 <= self.poisson < 0.5:
            raise ValueError("Poisson ratio must be in [0, 0.5); the incompressible limit is rejected")
        if self.density <= 0.0:
            raise ValueError("density must be positive")

    @property
    def lame(self):
        lam = self.youngs * self.poisson / ((1 + self.poisson) * (1 - 2 * self.poisson))
        mu = self.youngs / (2 * (1 + self.poisson))
        return lam, mu


@dataclass
class ContinuousOperators:
    mass: sp.csr_matrix       # 3n x 3n, SPD
    stiffness: sp.csr_matrix  # 3n x 3n, PSD with 6-dim rigid null space
    material: Material


@dataclass
class DiscreteOperators:
    """Block-diagonal corner-space operators plus the jump machinery."""

    mass: sp.csr_matrix       # 12m x 12m, 12x12 blocks
    stiffness: sp.csr_matrix  # 12m x 12m, 12x12 blocks
    jump: sp.csr_matrix       # 9F x 12m; rows 9f..9f+9 difference across face f
    areas: np.ndarray         # (F,)
    face_tets: np.ndarray     # (F, 2) incident tets per interior face
    corner_pos: np.ndarray    # (4m, 3) rest corner positions
    m: int

    @property
    def n_faces(self):
        return len(self.areas)

    @property
    def dim(self):
        return 12 * self.m


def element_mass_blocks(mesh, density):
    """Consistent linear-tet mass matrices, (m, 12, 12)."""
    vols = tet_volumes(mesh)
    nodal = np.full((4, 4), 1.0 / 20.0)
    np.fill_diagonal(nodal, 1.0 / 10.0)
    base = np.kron(nodal, np.eye(3))
    return density * vols[:, None, None] * base[None, :, :]


def _shape_gradients(mesh):
    """Gradients of the 4 barycentric shape functions, (m, 4, 3)."""
    p = mesh.vertices[mesh.tets]
    d = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=2)
    dinv = np.linalg.inv(d)
    grads = np.empty((mesh.m, 4, 3))
    grads[:, 1:, :] = dinv
    grads[:, 0, :] = -dinv.sum(axis=1)
    return grads


def element_stiffness_blocks(mesh, material):
    """Small-strain isotropic element stiffness matrices, (m, 12, 12)."""
    lam, mu = material.lame
    D = np.zeros((6, 6))
    D[:3, :3] = lam
    D[np.arange(3), np.arange(3)] = lam + 2 * mu
    D[np.arange(3, 6), np.arange(3, 6)] = mu

    grads = _shape_gradients(mesh)
    B = np.zeros((mesh.m, 6, 12))
    for node in range(4):
        gx, gy, gz = grads[:, node, 0], grads[:, node, 1], grads[:, node, 2]
        c = 3 * node
        B[:, 0, c + 0] = gx
        B[:, 1, c + 1] = gy
        B[:, 2, c + 2] = gz
        B[:, 3, c + 1] = gz
        B[:, 3, c + 2] = gy
        B[:, 4, c + 0] = gz
        B[:, 4, c + 2] = gx
        B[:, 5, c + 0] = gy
        B[:, 5, c + 1] = gx
    vols = tet_volumes(mesh)
    return vols[:, None, None] * np.einsum("mia,ij,mjb->mab", B, D, B)


def _assemble(blocks, tets, n):
    m = len(tets)
    dof = (3 * tets[:, :, None] + np.arange(3)[None, None, :]).reshape(m, 12)
    rows = np.repeat(dof, 12, axis=1).reshape(-1)
    cols = np.tile(dof, (1, 12)).reshape(-1)
    mat = sp.coo_matrix((blocks.reshape(-1), (rows, cols)), shape=(3 * n, 3 * n))
    return mat.tocsr()


def assemble_mass(mesh, density=1.0):
    return _assemble(element_mass_blocks(mesh, density), mesh.tets, mesh.n)


def assemble_stiffness(mesh, youngs=1.0, poisson=0.3):
    material = Material(youngs=youngs, poisson=poisson)
    return _assemble(element_stiffness_blocks(mesh, material), mesh.tets, mesh.n)


def continuous_operators(mesh, material=None):
    material = material or Material()
    return ContinuousOperators(
        mass=assemble_mass(mesh, material.density),
        stiffness=assemble_stiffness(mesh, material.youngs, material.poisson),
        material=material,
    )


def _block_diag(blocks):
    m = len(blocks)
    return sp.bsr_matrix(
        (blocks, np.arange(m), np.arange(m + 1)), shape=(12 * m, 12 * m)
    ).tocsr()


def _jump_matrix(adjacency, m):
    n_faces = adjacency.n_faces
    rows = np.arange(9 * n_faces)
    cols_a = (
        12 * adjacency.tet_a[:, None, None]
        + 3 * adjacency.corner_a[:, :, None]
        + np.arange(3)[None, None, :]
    ).reshape(-1)
    cols_b = (
        12 * adjacency.tet_b[:, None, None]
        + 3 * adjacency.corner_b[:, :, None]
        + np.arange(3)[None, None, :]
    ).reshape(-1)
    data = np.concatenate([np.ones(9 * n_faces), -np.ones(9 * n_faces)])
    return sp.coo_matrix(
        (data, (np.concatenate([rows, rows]), np.concatenate([cols_a, cols_b]))),
        shape=(9 * n_faces, 12 * m),
    ).tocsr()


def lift_discontinuous(mesh, ops, adjacency):
    """Lift assembled operators to the corner space: per-element matrices on
    the block diagonal plus jump maps built from the face correspondence."""
    mat = ops.material
    return DiscreteOperators(
        mass=_block_diag(element_mass_blocks(mesh, mat.density)),
        stiffness=_block_diag(element_stiffness_blocks(mesh, mat)),
        jump=_jump_matrix(adjacency, mesh.m),
        areas=adjacency.areas.copy(),
        face_tets=np.stack([adjacency.tet_a, adjacency.tet_b], axis=1),
        corner_pos=corner_positions(mesh),
        m=mesh.m,
    )


def lift_field(mesh, vertex_field):
    """Corner field sampling a continuous per-vertex field (3n -> 12m)."""
    vals = np.asarray(vertex_field, dtype=np.float64).reshape(mesh.n, 3)
    return vals[mesh.tets].reshape(-1)


def corner_positions(mesh):
    """Rest position of every corner, (4m, 3) in corner-dof order."""
    return mesh.vertices[mesh.tets].reshape(-1, 3)


def jump_norms(dops, u):
    """Per-face L2 norm of the jump of a corner field, (F,)."""
    j = (dops.jump @ u).reshape(-1, 9)
    return np.linalg.norm(j, axis=1)


def discontinuity_energy(dops, u):
    """Area-weighted group-L2 discontinuity: sum_f sqrt(A_f) * ||J_f u||.

    Convex, positively homogeneous, and exactly zero on lifted continuous
    fields; face-sparse minimizers localize faults."""
    return float(np.sqrt(dops.areas) @ jump_norms(dops, u))


def dump_operators(ops, directory):
    """Matrix Market dump of the assembled operators (debugging aid)."""
    import os

    from scipy.io import mmwrite

    os.makedirs(directory, exist_ok=True)
    mmwrite(os.path.join(directory, "mass.mtx"), sp.coo_matrix(ops.mass))
    mmwrite(os.path.join(directory, "stiffness.mtx"), sp.coo_matrix(ops.stiffness))
