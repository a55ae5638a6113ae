"""Pure NumPy/SciPy implementations of the numeric hot kernels.

The compiled extension ``fracturekit.kernels._native`` provides the same
functions; either backend may be active (see ``fracturekit.kernels``).
Both compute exact quantities, so results agree to reduction roundoff.
"""

import numpy as np
from scipy.spatial import cKDTree

BACKEND_NAME = "python"

# Chunk size for broadcasted point x triangle work (bounds peak memory).
_CHUNK_BUDGET = 4_000_000


def point_triangle_sq_distance(points, a, b, c):
    """Squared distance from each point to its paired triangle (a, b, c).

    All inputs are (N, 3); classic closest-point-on-triangle region tests.
    """
    ab = b - a
    ac = c - a
    ap = points - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)

    bp = points - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)

    cp = points - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    closest = np.empty_like(points)
    unset = np.ones(len(points), dtype=bool)

    def assign(mask, value):
        m = mask & unset
        closest[m] = value[m] if value.ndim == 2 else value
        unset[m] = False

    assign((d1 <= 0.0) & (d2 <= 0.0), a)
    assign((d3 >= 0.0) & (d4 <= d3), b)
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = np.where(d1 != d3, d1 / (d1 - d3), 0.0)
        assign((vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0), a + ab * v_ab[:, None])
        assign((d6 >= 0.0) & (d5 <= d6), c)
        w_ac = np.where(d2 != d6, d2 / (d2 - d6), 0.0)
        assign((vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0), a + ac * w_ac[:, None])
        e43 = d4 - d3
        e56 = d5 - d6
        w_bc = np.where(e43 + e56 != 0.0, e43 / (e43 + e56), 0.0)
        assign((va <= 0.0) & (e43 >= 0.0) & (e56 >= 0.0), b + (c - b) * w_bc[:, None])
        denom = va + vb + vc
        safe = np.where(denom != 0.0, denom, 1.0)
        v = vb / safe
        w = vc / safe
    closest[unset] = (a + ab * v[:, None] + ac * w[:, None])[unset]

    diff = points - closest
    return np.einsum("ij,ij->i", diff, diff)


def _sq_distance_to_candidates(points, V, F, cand):
    """Min squared distance from points[i] to triangles F[cand[i, :]]."""
    n, k = cand.shape
    tri = V[F[cand.reshape(-1)]]  # (n*k, 3, 3)
    rep = np.repeat(points, k, axis=0)
    d2 = point_triangle_sq_distance(rep, tri[:, 0], tri[:, 1], tri[:, 2])
    return d2.reshape(n, k).min(axis=1)


def point_mesh_sq_distance(points, V, F):
    """Exact squared unsigned distance from each point to the triangle mesh."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    n_tri = len(F)
    if n_tri <= 32:
        out = np.empty(len(points))
        step = max(1, _CHUNK_BUDGET // max(n_tri, 1))
        for lo in range(0, len(points), step):
            chunk = points[lo : lo + step]
            cand = np.broadcast_to(np.arange(n_tri), (len(chunk), n_tri))
            out[lo : lo + step] = _sq_distance_to_candidates(chunk, V, F, cand)
        return out

    centroids = V[F].mean(axis=1)
    # Max distance from a centroid to its own triangle's vertices; any triangle
    # whose centroid is farther than best + r_max cannot hold a closer point.
    r_max = np.sqrt(((V[F] - centroids[:, None, :]) ** 2).sum(axis=2)).max()
    tree = cKDTree(centroids)

    out = np.empty(len(points))
    step = max(1, _CHUNK_BUDGET // 64)
    for lo in range(0, len(points), step):
        chunk = points[lo : lo + step]
        k = min(8, n_tri)
        pending = np.arange(len(chunk))
        best = np.full(len(chunk), np.inf)
        while len(pending):
            dc, cand = tree.query(chunk[pending], k=k)
            dc = np.atleast_2d(dc)
            cand = np.atleast_2d(cand)
            d2 = _sq_distance_to_candidates(chunk[pending], V, F, cand)
            best[pending] = np.minimum(best[pending], d2)
            if k >= n_tri:
                break
            unresolved = dc[:, -1] <= np.sqrt(best[pending]) + r_max
            pending = pending[unresolved]
            k = min(k * 2, n_tri)
        out[lo : lo + step] = best
    return out


def _fill_rule(dx, dy):
    """Half-open boundary ownership: exactly one of a shared edge's two
    opposite directions counts a boundary point as inside."""
    return (dy < 0.0) | ((dy == 0.0) & (dx > 0.0))


def _axis_parity(origin, spacing, dims, V, F, axis):
    """Inside-parity for every lattice point using rays along one axis."""
    u_ax, v_ax = (axis + 1) % 3, (axis + 2) % 3
    nu, nv, na = dims[u_ax], dims[v_ax], dims[axis]
    ou, ov, oa = origin[u_ax], origin[v_ax], origin[axis]
    h = spacing

    tri = V[F]  # (T, 3, 3)
    p0, p1, p2 = tri[:, 0], tri[:, 1], tri[:, 2]
    normals = np.cross(p1 - p0, p2 - p0)

    line_ids = []
    crossings = []
    for t in range(len(F)):
        a2 = np.array([p0[t, u_ax], p0[t, v_ax]])
        b2 = np.array([p1[t, u_ax], p1[t, v_ax]])
        c2 = np.array([p2[t, u_ax], p2[t, v_ax]])
        w = (b2[0] - a2[0]) * (c2[1] - a2[1]) - (b2[1] - a2[1]) * (c2[0] - a2[0])
        if w == 0.0:
            continue
        if w < 0.0:
            b2, c2 = c2, b2

        lo_u = max(int(np.ceil((min(a2[0], b2[0], c2[0]) - ou) / h)), 0)
        hi_u = min(int(np.floor((max(a2[0], b2[0], c2[0]) - ou) / h)), nu - 1)
        lo_v = max(int(np.ceil((min(a2[1], b2[1], c2[1]) - ov) / h)), 0)
        hi_v = min(int(np.floor((max(a2[1], b2[1], c2[1]) - ov) / h)), nv - 1)
        if lo_u > hi_u or lo_v > hi_v:
            continue

        qu = ou + h * np.arange(lo_u, hi_u + 1)
        qv = ov + h * np.arange(lo_v, hi_v + 1)
        QU, QV = np.meshgrid(qu, qv, indexing="ij")

        inside = np.ones(QU.shape, dtype=bool)
        for ea, eb in ((a2, b2), (b2, c2), (c2, a2)):
            dx, dy = eb[0] - ea[0], eb[1] - ea[1]
            e = dx * (QV - ea[1]) - dy * (QU - ea[0])
            inside &= (e > 0.0) | ((e == 0.0) & _fill_rule(dx, dy))
        if not inside.any():
            continue

        iu, iv = np.nonzero(inside)
        iu = iu + lo_u
        iv = iv + lo_v
        n = normals[t]
        cross_a = p0[t, axis] - (
            n[u_ax] * (ou + h * iu - p0[t, u_ax]) + n[v_ax] * (ov + h * iv - p0[t, v_ax])
        ) / n[axis]
        line_ids.append(iu * nv + iv)
        crossings.append(cross_a)

    parity = np.zeros((nu, nv, na), dtype=bool)
    if not line_ids:
        return parity

    line_ids = np.concatenate(line_ids)
    crossings = np.concatenate(crossings)
    order = np.lexsort((crossings, line_ids))
    line_ids = line_ids[order]
    crossings = crossings[order]
    samples = oa + h * np.arange(na)

    starts = np.flatnonzero(np.r_[True, line_ids[1:] != line_ids[:-1]])
    bounds = np.r_[starts, len(line_ids)]
    for s, e in zip(bounds[:-1], bounds[1:]):
        line = line_ids[s]
        cr = crossings[s:e]
        above = len(cr) - np.searchsorted(cr, samples, side="right")
        parity[line // nv, line % nv, :] = (above % 2) == 1
    return parity


def grid_inside_mask(origin, spacing, dims, V, F):
    """Containment mask for a regular lattice via 3-axis parity majority."""
    origin = np.asarray(origin, dtype=np.float64)
    dims = tuple(int(d) for d in dims)
    votes = np.zeros(dims, dtype=np.int8)
    for axis in range(3):
        par = _axis_parity(origin, spacing, dims, V, F, axis)
        votes += np.moveaxis(par, (0, 1, 2), ((axis + 1) % 3, (axis + 2) % 3, axis)).astype(np.int8)
    return votes >= 2


_RAY_DIRS = np.array(
    [
        [0.5377671873, 0.8323712354, 0.1341231123],
        [-0.2931457812, 0.3415210031, 0.8930123471],
        [0.7712356214, -0.4123405634, 0.4854312394],
    ]
)


def points_inside_mesh(points, V, F):
    """Watertight containment test, parity along 3 fixed rays, majority vote."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    tri = V[F]
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    e1 = b - a
    e2 = c - a
    votes = np.zeros(len(points), dtype=np.int8)
    step = max(1, _CHUNK_BUDGET // max(len(F), 1))
    for d in _RAY_DIRS:
        pvec = np.cross(d, e2)
        det = np.einsum("ij,ij->i", e1, pvec)
        ok = np.abs(det) > 1e-14
        inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        for lo in range(0, len(points), step):
            p = points[lo : lo + step]
            tvec = p[:, None, :] - a[None, :, :]
            u = np.einsum("ptj,tj->pt", tvec, pvec) * inv_det
            qvec = np.cross(tvec, e1[None, :, :])
            v = np.einsum("ptj,j->pt", qvec, d) * inv_det
            t = np.einsum("ptj,tj->pt", qvec, e2) * inv_det
            hit = ok & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > 0.0)
            votes[lo : lo + step] += (hit.sum(axis=1) % 2).astype(np.int8)
    return votes >= 2


def nearest_sq_dists(query, target):
    """Squared distance from each query point to its nearest target point."""
    tree = cKDTree(np.asarray(target, dtype=np.float64))
    d, _ = tree.query(np.asarray(query, dtype=np.float64), k=1)
    return d * d


def segment_mesh_crossings(starts, ends, V, F, t_lo=1e-9, t_hi=None):
    """Count proper triangle crossings of each segment, params in (t_lo, t_hi)."""
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    ends = np.ascontiguousarray(ends, dtype=np.float64)
    if t_hi is None:
        t_hi = 1.0 - t_lo
    tri = V[F]
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    e1 = b - a
    e2 = c - a
    counts = np.zeros(len(starts), dtype=np.int64)
    step = max(1, _CHUNK_BUDGET // max(len(F), 1))
    for lo in range(0, len(starts), step):
        p = starts[lo : lo + step]
        d = ends[lo : lo + step] - p
        pvec = np.cross(d[:, None, :], e2[None, :, :])
        det = np.einsum("ptj,tj->pt", pvec, e1)
        ok = np.abs(det) > 1e-14
        inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        tvec = p[:, None, :] - a[None, :, :]
        u = np.einsum("ptj,ptj->pt", tvec, pvec) * inv_det
        qvec = np.cross(tvec, e1[None, :, :])
        v = np.einsum("ptj,pj->pt", qvec, d) * inv_det
        t = np.einsum("ptj,tj->pt", qvec, e2) * inv_det
        hit = ok & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > t_lo) & (t < t_hi)
        counts[lo : lo + step] = hit.sum(axis=1)
    return counts
