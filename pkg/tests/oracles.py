"""Independent reference implementations used only to verify the package.

Everything here is deliberately written along a different path than the
library code: brute-force loops, dense linear algebra, determinant-based
volumes, and black-box optimization.
"""

import numpy as np
import scipy.linalg
import scipy.optimize


def brute_force_chamfer(p, q):
    """O(N*M) double-sum chamfer distance."""
    d2 = ((p[:, None, :] - q[None, :, :]) ** 2).sum(axis=2)
    return float(d2.min(axis=1).sum() + d2.min(axis=0).sum())


def brute_force_nearest_sq(p, q):
    return ((p[:, None, :] - q[None, :, :]) ** 2).sum(axis=2).min(axis=1)


def det_tet_volumes(mesh):
    """Signed tet volumes via 4x4 determinants (ones in the first column)."""
    vols = []
    for tet in mesh.tets:
        hom = np.ones((4, 4))
        hom[:, 1:] = mesh.vertices[tet]
        vols.append(np.linalg.det(hom) / 6.0)
    return np.asarray(vols)


def dense_generalized_eigs(stiffness, mass, k):
    """Dense reference for the k smallest generalized eigenvalues."""
    vals = scipy.linalg.eigh(
        np.asarray(stiffness.todense()), np.asarray(mass.todense()), eigvals_only=True
    )
    return vals[:k]


def linear_elastic_energy(mesh, material, vertex_disp):
    """Small-strain isotropic energy, integrated element by element.

    Independent route: per-element deformation gradient from a solve
    against edge vectors, engineering strain, lambda/mu form.
    """
    lam, mu = material.lame
    u = np.asarray(vertex_disp, dtype=np.float64).reshape(-1, 3)
    total = 0.0
    for tet in mesh.tets:
        x = mesh.vertices[tet]
        d = u[tet]
        edges = (x[1:] - x[0]).T          # 3x3
        dedges = (d[1:] - d[0]).T
        grad = dedges @ np.linalg.inv(edges)  # displacement gradient
        strain = 0.5 * (grad + grad.T)
        vol = abs(np.linalg.det(edges)) / 6.0
        total += vol * (
            lam / 2.0 * np.trace(strain) ** 2 + mu * np.sum(strain * strain)
        )
    return total


def fd_hessian(f, x0, h=1e-5):
    """Central finite-difference Hessian of a scalar function."""
    n = len(x0)
    hess = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            xpp = x0.copy(); xpp[i] += h; xpp[j] += h
            xpm = x0.copy(); xpm[i] += h; xpm[j] -= h
            xmp = x0.copy(); xmp[i] -= h; xmp[j] += h
            xmm = x0.copy(); xmm[i] -= h; xmm[j] -= h
            hess[i, j] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h)
    return hess


def mass_orthonormal_complement(mass, basis_cols):
    """Dense mass-orthonormal basis of the complement of the given columns."""
    m_dense = np.asarray(mass.todense())
    dim = m_dense.shape[0]
    # mass-orthonormalize the given columns
    cols = []
    for j in range(basis_cols.shape[1]):
        v = basis_cols[:, j].copy()
        for u in cols:
            v -= (u @ (m_dense @ v)) * u
        v /= np.sqrt(v @ (m_dense @ v))
        cols.append(v)
    comp = []
    for e in np.eye(dim).T:
        v = e.copy()
        for u in cols + comp:
            v -= (u @ (m_dense @ v)) * u
        nrm = np.sqrt(max(v @ (m_dense @ v), 0.0))
        if nrm > 1e-8:
            comp.append(v / nrm)
    return np.stack(comp, axis=1)


def brute_force_first_mode(dops, rigid_basis, omega, n_starts=100, seed=1234):
    """Dense multistart minimization of the fracture-mode objective over the
    unit mass sphere orthogonal to the rigid motions.

    Parametrized by coordinates y in a dense mass-orthonormal complement
    basis B (so u = B y / |y| satisfies both constraints); minimized with
    Powell, which tolerates the nonsmooth group term.
    """
    q_dense = np.asarray(dops.stiffness.todense())
    j_dense = np.asarray(dops.jump.todense())
    sqrt_a = np.sqrt(dops.areas)
    comp = mass_orthonormal_complement(dops.mass, rigid_basis)

    def objective(y):
        nrm = np.linalg.norm(y)
        if nrm < 1e-12:
            return 1e12
        u = comp @ (y / nrm)
        jumps = (j_dense @ u).reshape(-1, 9)
        return 0.5 * u @ (q_dense @ u) + omega * float(
            sqrt_a @ np.linalg.norm(jumps, axis=1)
        )

    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(n_starts):
        y0 = rng.standard_normal(comp.shape[1])
        res = scipy.optimize.minimize(
            objective, y0, method="Powell",
            options={"maxiter": 20000, "xtol": 1e-10, "ftol": 1e-12},
        )
        best = min(best, float(res.fun))
    return best


def sort_percentile_oracle(values, q):
    """Nearest-rank percentile by explicit sort: ceil(q/100*n)-th smallest."""
    s = sorted(values)
    rank = int(np.ceil(q / 100.0 * len(s)))
    return s[max(rank, 1) - 1]
