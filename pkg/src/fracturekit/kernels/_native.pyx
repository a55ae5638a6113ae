# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the numeric hot kernels.

Mirrors fracturekit.kernels.reference; geometric predicates (fill rule,
parity, crossing coordinates) use the same expressions so containment
decisions agree exactly between backends.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor, sqrt
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()

BACKEND_NAME = "native"

cdef double DET_EPS = 1e-14


cdef inline double _dot3(const double* a, const double* b) nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef inline void _sub3(const double* a, const double* b, double* out) nogil:
    out[0] = a[0] - b[0]
    out[1] = a[1] - b[1]
    out[2] = a[2] - b[2]


cdef inline void _cross3(const double* a, const double* b, double* out) nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef double _pt_tri_sq(const double* p, const double* a, const double* b,
                       const double* c) nogil:
    """Squared distance point-triangle, closest-point region tests."""
    cdef double ab[3], ac[3], ap[3], bp[3], cp[3], bc[3], q[3], diff[3]
    cdef double d1, d2, d3, d4, d5, d6, vc, vb, va, v, w, denom
    _sub3(b, a, ab)
    _sub3(c, a, ac)
    _sub3(p, a, ap)
    d1 = _dot3(ab, ap)
    d2 = _dot3(ac, ap)
    if d1 <= 0.0 and d2 <= 0.0:
        _sub3(p, a, diff)
        return _dot3(diff, diff)
    _sub3(p, b, bp)
    d3 = _dot3(ab, bp)
    d4 = _dot3(ac, bp)
    if d3 >= 0.0 and d4 <= d3:
        _sub3(p, b, diff)
        return _dot3(diff, diff)
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3) if d1 != d3 else 0.0
        q[0] = a[0] + ab[0] * v
        q[1] = a[1] + ab[1] * v
        q[2] = a[2] + ab[2] * v
        _sub3(p, q, diff)
        return _dot3(diff, diff)
    _sub3(p, c, cp)
    d5 = _dot3(ab, cp)
    d6 = _dot3(ac, cp)
    if d6 >= 0.0 and d5 <= d6:
        _sub3(p, c, diff)
        return _dot3(diff, diff)
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6) if d2 != d6 else 0.0
        q[0] = a[0] + ac[0] * w
        q[1] = a[1] + ac[1] * w
        q[2] = a[2] + ac[2] * w
        _sub3(p, q, diff)
        return _dot3(diff, diff)
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        denom = (d4 - d3) + (d5 - d6)
        w = (d4 - d3) / denom if denom != 0.0 else 0.0
        _sub3(c, b, bc)
        q[0] = b[0] + bc[0] * w
        q[1] = b[1] + bc[1] * w
        q[2] = b[2] + bc[2] * w
        _sub3(p, q, diff)
        return _dot3(diff, diff)
    denom = va + vb + vc
    if denom == 0.0:
        denom = 1.0
    v = vb / denom
    w = vc / denom
    q[0] = a[0] + ab[0] * v + ac[0] * w
    q[1] = a[1] + ab[1] * v + ac[1] * w
    q[2] = a[2] + ab[2] * v + ac[2] * w
    _sub3(p, q, diff)
    return _dot3(diff, diff)


cdef int _cmp_double(const void* x, const void* y) noexcept nogil:
    cdef double a = (<const double*> x)[0]
    cdef double b = (<const double*> y)[0]
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


# ---------------------------------------------------------------------------
# Uniform cell grids (triangle bins / point bins) with expanding-shell search.
# ---------------------------------------------------------------------------

cdef struct CellGrid:
    double bmin[3]
    double cell
    long nx, ny, nz
    long* start      # CSR offsets, len ncells + 1
    long* items      # item ids


cdef inline long _cell_index(CellGrid* g, long i, long j, long k) nogil:
    return (i * g.ny + j) * g.nz + k


cdef inline long _clampl(long v, long lo, long hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef void _free_grid(CellGrid* g) nogil:
    if g.start != NULL:
        free(g.start)
        g.start = NULL
    if g.items != NULL:
        free(g.items)
        g.items = NULL


cdef int _build_grid(CellGrid* g, double[:, ::1] lo_pts, double[:, ::1] hi_pts,
                     long target_cells_per_axis) nogil:
    """Bin items by AABB [lo_pts[i], hi_pts[i]] into a uniform grid."""
    cdef long n = lo_pts.shape[0]
    cdef long i, j, k, t, c, total
    cdef double ext, m
    cdef long i0, i1, j0, j1, k0, k1
    g.start = NULL
    g.items = NULL
    for j in range(3):
        g.bmin[j] = lo_pts[0, j]
    cdef double bmax[3]
    for j in range(3):
        bmax[j] = hi_pts[0, j]
    for t in range(n):
        for j in range(3):
            if lo_pts[t, j] < g.bmin[j]:
                g.bmin[j] = lo_pts[t, j]
            if hi_pts[t, j] > bmax[j]:
                bmax[j] = hi_pts[t, j]
    ext = 0.0
    for j in range(3):
        m = bmax[j] - g.bmin[j]
        if m > ext:
            ext = m
    if ext <= 0.0:
        ext = 1.0
    g.cell = ext / <double> target_cells_per_axis
    g.nx = _clampl(<long> floor((bmax[0] - g.bmin[0]) / g.cell) + 1, 1, 4 * target_cells_per_axis)
    g.ny = _clampl(<long> floor((bmax[1] - g.bmin[1]) / g.cell) + 1, 1, 4 * target_cells_per_axis)
    g.nz = _clampl(<long> floor((bmax[2] - g.bmin[2]) / g.cell) + 1, 1, 4 * target_cells_per_axis)
    total = g.nx * g.ny * g.nz
    g.start = <long*> malloc((total + 1) * sizeof(long))
    if g.start == NULL:
        return -1
    for c in range(total + 1):
        g.start[c] = 0
    # count
    cdef long nitems = 0
    for t in range(n):
        i0 = _clampl(<long> floor((lo_pts[t, 0] - g.bmin[0]) / g.cell), 0, g.nx - 1)
        i1 = _clampl(<long> floor((hi_pts[t, 0] - g.bmin[0]) / g.cell), 0, g.nx - 1)
        j0 = _clampl(<long> floor((lo_pts[t, 1] - g.bmin[1]) / g.cell), 0, g.ny - 1)
        j1 = _clampl(<long> floor((hi_pts[t, 1] - g.bmin[1]) / g.cell), 0, g.ny - 1)
        k0 = _clampl(<long> floor((lo_pts[t, 2] - g.bmin[2]) / g.cell), 0, g.nz - 1)
        k1 = _clampl(<long> floor((hi_pts[t, 2] - g.bmin[2]) / g.cell), 0, g.nz - 1)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                for k in range(k0, k1 + 1):
                    g.start[_cell_index(g, i, j, k) + 1] += 1
                    nitems += 1
    for c in range(total):
        g.start[c + 1] += g.start[c]
    g.items = <long*> malloc(nitems * sizeof(long) if nitems > 0 else sizeof(long))
    if g.items == NULL:
        free(g.start)
        g.start = NULL
        return -1
    # fill (reuse start as cursor, then restore)
    cdef long* cursor = <long*> malloc(total * sizeof(long))
    if cursor == NULL:
        _free_grid(g)
        return -1
    for c in range(total):
        cursor[c] = g.start[c]
    for t in range(n):
        i0 = _clampl(<long> floor((lo_pts[t, 0] - g.bmin[0]) / g.cell), 0, g.nx - 1)
        i1 = _clampl(<long> floor((hi_pts[t, 0] - g.bmin[0]) / g.cell), 0, g.nx - 1)
        j0 = _clampl(<long> floor((lo_pts[t, 1] - g.bmin[1]) / g.cell), 0, g.ny - 1)
        j1 = _clampl(<long> floor((hi_pts[t, 1] - g.bmin[1]) / g.cell), 0, g.ny - 1)
        k0 = _clampl(<long> floor((lo_pts[t, 2] - g.bmin[2]) / g.cell), 0, g.nz - 1)
        k1 = _clampl(<long> floor((hi_pts[t, 2] - g.bmin[2]) / g.cell), 0, g.nz - 1)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                for k in range(k0, k1 + 1):
                    c = _cell_index(g, i, j, k)
                    g.items[cursor[c]] = t
                    cursor[c] += 1
    free(cursor)
    return 0


ctypedef double (*item_dist_fn)(long item, const double* p, void* ctx) nogil


cdef struct TriCtx:
    const double* V
    const long* F


cdef double _tri_item_dist(long item, const double* p, void* ctx) nogil:
    cdef TriCtx* tc = <TriCtx*> ctx
    cdef const long* f = tc.F + 3 * item
    return _pt_tri_sq(p, tc.V + 3 * f[0], tc.V + 3 * f[1], tc.V + 3 * f[2])


cdef struct PtCtx:
    const double* Q


cdef double _pt_item_dist(long item, const double* p, void* ctx) nogil:
    cdef PtCtx* pc = <PtCtx*> ctx
    cdef const double* q = pc.Q + 3 * item
    cdef double dx = p[0] - q[0]
    cdef double dy = p[1] - q[1]
    cdef double dz = p[2] - q[2]
    return dx * dx + dy * dy + dz * dz


cdef double _grid_nearest(CellGrid* g, const double* p, item_dist_fn dist,
                          void* ctx, long* stamp, long qid) nogil:
    """Exact min distance from p to any binned item via expanding shells."""
    cdef long ci = _clampl(<long> floor((p[0] - g.bmin[0]) / g.cell), 0, g.nx - 1)
    cdef long cj = _clampl(<long> floor((p[1] - g.bmin[1]) / g.cell), 0, g.ny - 1)
    cdef long ck = _clampl(<long> floor((p[2] - g.bmin[2]) / g.cell), 0, g.nz - 1)
    cdef double best = 1e300
    cdef long s_max = ci
    if g.nx - 1 - ci > s_max:
        s_max = g.nx - 1 - ci
    if cj > s_max:
        s_max = cj
    if g.ny - 1 - cj > s_max:
        s_max = g.ny - 1 - cj
    if ck > s_max:
        s_max = ck
    if g.nz - 1 - ck > s_max:
        s_max = g.nz - 1 - ck

    cdef long s, i, j, k, c, it, idx
    cdef double bound, d
    for s in range(s_max + 1):
        # cells at Chebyshev distance exactly s from (ci, cj, ck)
        for i in range(ci - s, ci + s + 1):
            if i < 0 or i >= g.nx:
                continue
            for j in range(cj - s, cj + s + 1):
                if j < 0 or j >= g.ny:
                    continue
                for k in range(ck - s, ck + s + 1):
                    if k < 0 or k >= g.nz:
                        continue
                    if max(abs(i - ci), max(abs(j - cj), abs(k - ck))) != s:
                        continue
                    c = _cell_index(g, i, j, k)
                    for idx in range(g.start[c], g.start[c + 1]):
                        it = g.items[idx]
                        if stamp[it] == qid:
                            continue
                        stamp[it] = qid
                        d = dist(it, p, ctx)
                        if d < best:
                            best = d
        bound = (<double> s) * g.cell
        if best <= bound * bound:
            break
    return best


def point_mesh_sq_distance(points, V, F):
    """Exact squared unsigned distance from each point to the triangle mesh."""
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] Vv = np.ascontiguousarray(V, dtype=np.float64)
    cdef long[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.int64)
    cdef long n_tri = Fv.shape[0]
    cdef long n_pts = P.shape[0]
    if n_tri == 0:
        raise ValueError("mesh has no faces")
    out = np.empty(n_pts, dtype=np.float64)
    cdef double[::1] ov = out

    tri = np.asarray(V, dtype=np.float64)[np.asarray(F, dtype=np.int64)]
    cdef double[:, ::1] tlo = np.ascontiguousarray(tri.min(axis=1))
    cdef double[:, ::1] thi = np.ascontiguousarray(tri.max(axis=1))
    cdef long axis_cells = <long> max(2, min(64, round(n_tri ** (1.0 / 3.0)) * 2))

    cdef CellGrid g
    if _build_grid(&g, tlo, thi, axis_cells) != 0:
        raise MemoryError()
    cdef long* stamp = <long*> malloc(n_tri * sizeof(long))
    if stamp == NULL:
        _free_grid(&g)
        raise MemoryError()
    cdef long t, q
    for t in range(n_tri):
        stamp[t] = -1
    cdef TriCtx ctx
    ctx.V = &Vv[0, 0]
    ctx.F = &Fv[0, 0]
    with nogil:
        for q in range(n_pts):
            ov[q] = _grid_nearest(&g, &P[q, 0], _tri_item_dist, &ctx, stamp, q)
    free(stamp)
    _free_grid(&g)
    return out


def nearest_sq_dists(query, target):
    """Squared distance from each query point to its nearest target point."""
    cdef double[:, ::1] P = np.ascontiguousarray(query, dtype=np.float64)
    cdef double[:, ::1] Q = np.ascontiguousarray(target, dtype=np.float64)
    cdef long n_q = P.shape[0]
    cdef long n_t = Q.shape[0]
    if n_t == 0:
        raise ValueError("empty target cloud")
    out = np.empty(n_q, dtype=np.float64)
    cdef double[::1] ov = out
    cdef long axis_cells = <long> max(1, min(64, round(n_t ** (1.0 / 3.0))))
    cdef CellGrid g
    if _build_grid(&g, Q, Q, axis_cells) != 0:
        raise MemoryError()
    cdef long* stamp = <long*> malloc(n_t * sizeof(long))
    if stamp == NULL:
        _free_grid(&g)
        raise MemoryError()
    cdef long t, q
    for t in range(n_t):
        stamp[t] = -1
    cdef PtCtx ctx
    ctx.Q = &Q[0, 0]
    with nogil:
        for q in range(n_q):
            ov[q] = _grid_nearest(&g, &P[q, 0], _pt_item_dist, &ctx, stamp, q)
    free(stamp)
    _free_grid(&g)
    return out


# ---------------------------------------------------------------------------
# Lattice containment via per-axis line parity with a half-open fill rule.
# ---------------------------------------------------------------------------

cdef inline bint _fill_rule(double dx, double dy) nogil:
    return (dy < 0.0) or (dy == 0.0 and dx > 0.0)


cdef void _axis_parity_native(double ou, double ov, double oa, double h,
                              long nu, long nv, long na,
                              double[:, ::1] V, long[:, ::1] F,
                              long u_ax, long v_ax, long axis,
                              long* counts, double* slots, long* offsets,
                              cnp.int8_t* votes, long su, long sv, long sa) nogil:
    """Accumulate one axis's parity votes (strides su/sv/sa map to global).

    counts must arrive pre-filled by _count_only; it is consumed here.
    """
    cdef long n_tri = F.shape[0]
    cdef long n_lines = nu * nv
    cdef long t, line, iu, iv, ia
    cdef long lo_u, hi_u, lo_v, hi_v
    cdef double a0, a1, b0, b1, c0, c1, w, tmp0, tmp1
    cdef double e0x, e0y, e1x, e1y, e2x, e2y
    cdef double qu, qv, e_a, e_b, e_c
    cdef double n_vec[3]
    cdef double ea[3]
    cdef double eb[3]
    cdef double mn, mx, cross_a, sample
    cdef const double* P0
    cdef const double* P1
    cdef const double* P2
    cdef bint inside
    cdef long j, n_cr

    offsets[0] = 0
    for line in range(n_lines):
        offsets[line + 1] = offsets[line] + counts[line]
        counts[line] = 0

    for t in range(n_tri):
        P0 = &V[F[t, 0], 0]
        P1 = &V[F[t, 1], 0]
        P2 = &V[F[t, 2], 0]
        a0 = P0[u_ax]
        a1 = P0[v_ax]
        b0 = P1[u_ax]
        b1 = P1[v_ax]
        c0 = P2[u_ax]
        c1 = P2[v_ax]
        w = (b0 - a0) * (c1 - a1) - (b1 - a1) * (c0 - a0)
        if w == 0.0:
            continue
        if w < 0.0:
            tmp0 = b0
            tmp1 = b1
            b0 = c0
            b1 = c1
            c0 = tmp0
            c1 = tmp1
        mn = min(a0, min(b0, c0))
        mx = max(a0, max(b0, c0))
        lo_u = <long> ceil((mn - ou) / h)
        hi_u = <long> floor((mx - ou) / h)
        if lo_u < 0:
            lo_u = 0
        if hi_u > nu - 1:
            hi_u = nu - 1
        mn = min(a1, min(b1, c1))
        mx = max(a1, max(b1, c1))
        lo_v = <long> ceil((mn - ov) / h)
        hi_v = <long> floor((mx - ov) / h)
        if lo_v < 0:
            lo_v = 0
        if hi_v > nv - 1:
            hi_v = nv - 1
        if lo_u > hi_u or lo_v > hi_v:
            continue
        e0x = b0 - a0
        e0y = b1 - a1
        e1x = c0 - b0
        e1y = c1 - b1
        e2x = a0 - c0
        e2y = a1 - c1
        _sub3(P1, P0, ea)
        _sub3(P2, P0, eb)
        _cross3(ea, eb, n_vec)
        for iu in range(lo_u, hi_u + 1):
            qu = ou + h * iu
            for iv in range(lo_v, hi_v + 1):
                qv = ov + h * iv
                e_a = e0x * (qv - a1) - e0y * (qu - a0)
                inside = (e_a > 0.0) or (e_a == 0.0 and _fill_rule(e0x, e0y))
                if inside:
                    e_b = e1x * (qv - b1) - e1y * (qu - b0)
                    inside = (e_b > 0.0) or (e_b == 0.0 and _fill_rule(e1x, e1y))
                if inside:
                    e_c = e2x * (qv - c1) - e2y * (qu - c0)
                    inside = (e_c > 0.0) or (e_c == 0.0 and _fill_rule(e2x, e2y))
                if not inside:
                    continue
                line = iu * nv + iv
                cross_a = P0[axis] - (
                    n_vec[u_ax] * (qu - P0[u_ax]) + n_vec[v_ax] * (qv - P0[v_ax])
                ) / n_vec[axis]
                slots[offsets[line] + counts[line]] = cross_a
                counts[line] += 1

    for iu in range(nu):
        for iv in range(nv):
            line = iu * nv + iv
            n_cr = counts[line]
            if n_cr == 0:
                continue
            qsort(slots + offsets[line], n_cr, sizeof(double), _cmp_double)
            j = 0
            for ia in range(na):
                sample = oa + h * ia
                while j < n_cr and slots[offsets[line] + j] <= sample:
                    j += 1
                if (n_cr - j) % 2 == 1:
                    votes[iu * su + iv * sv + ia * sa] += 1


def grid_inside_mask(origin, spacing, dims, V, F):
    """Containment mask for a regular lattice via 3-axis parity majority."""
    cdef double[:, ::1] Vv = np.ascontiguousarray(V, dtype=np.float64)
    cdef long[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.int64)
    cdef double o[3]
    o[0] = float(origin[0])
    o[1] = float(origin[1])
    o[2] = float(origin[2])
    cdef double h = float(spacing)
    cdef long n[3]
    n[0] = int(dims[0])
    n[1] = int(dims[1])
    n[2] = int(dims[2])
    votes_arr = np.zeros((n[0], n[1], n[2]), dtype=np.int8)
    cdef cnp.int8_t[:, :, ::1] votes = votes_arr
    cdef long strides[3]
    strides[0] = n[1] * n[2]
    strides[1] = n[2]
    strides[2] = 1

    cdef long axis, u_ax, v_ax, n_lines, total, i
    cdef long* counts
    cdef long* offsets
    cdef double* slots

    for axis in range(3):
        u_ax = (axis + 1) % 3
        v_ax = (axis + 2) % 3
        n_lines = n[u_ax] * n[v_ax]
        counts = <long*> malloc(n_lines * sizeof(long))
        offsets = <long*> malloc((n_lines + 1) * sizeof(long))
        if counts == NULL or offsets == NULL:
            raise MemoryError()
        with nogil:
            _count_only(o[u_ax], o[v_ax], h, n[u_ax], n[v_ax], Vv, Fv, u_ax, v_ax, counts)
        total = 0
        for i in range(n_lines):
            total += counts[i]
        slots = <double*> malloc((total if total > 0 else 1) * sizeof(double))
        if slots == NULL:
            free(counts)
            free(offsets)
            raise MemoryError()
        with nogil:
            _axis_parity_native(o[u_ax], o[v_ax], o[axis], h,
                                n[u_ax], n[v_ax], n[axis], Vv, Fv,
                                u_ax, v_ax, axis, counts, slots, offsets,
                                &votes[0, 0, 0], strides[u_ax], strides[v_ax],
                                strides[axis])
        free(counts)
        free(offsets)
        free(slots)
    return votes_arr >= 2


cdef void _count_only(double ou, double ov, double h, long nu, long nv,
                      double[:, ::1] V, long[:, ::1] F,
                      long u_ax, long v_ax, long* counts) nogil:
    """Count lattice hits per line (sizing pass for grid_inside_mask)."""
    cdef long n_tri = F.shape[0]
    cdef long t, line, iu, iv, lo_u, hi_u, lo_v, hi_v
    cdef double a0, a1, b0, b1, c0, c1, w, tmp0, tmp1
    cdef double e0x, e0y, e1x, e1y, e2x, e2y, qu, qv, e_a, e_b, e_c
    cdef double mn, mx
    cdef const double* P0
    cdef const double* P1
    cdef const double* P2
    cdef bint inside
    for line in range(nu * nv):
        counts[line] = 0
    for t in range(n_tri):
        P0 = &V[F[t, 0], 0]
        P1 = &V[F[t, 1], 0]
        P2 = &V[F[t, 2], 0]
        a0 = P0[u_ax]
        a1 = P0[v_ax]
        b0 = P1[u_ax]
        b1 = P1[v_ax]
        c0 = P2[u_ax]
        c1 = P2[v_ax]
        w = (b0 - a0) * (c1 - a1) - (b1 - a1) * (c0 - a0)
        if w == 0.0:
            continue
        if w < 0.0:
            tmp0 = b0
            tmp1 = b1
            b0 = c0
            b1 = c1
            c0 = tmp0
            c1 = tmp1
        mn = min(a0, min(b0, c0))
        mx = max(a0, max(b0, c0))
        lo_u = <long> ceil((mn - ou) / h)
        hi_u = <long> floor((mx - ou) / h)
        if lo_u < 0:
            lo_u = 0
        if hi_u > nu - 1:
            hi_u = nu - 1
        mn = min(a1, min(b1, c1))
        mx = max(a1, max(b1, c1))
        lo_v = <long> ceil((mn - ov) / h)
        hi_v = <long> floor((mx - ov) / h)
        if lo_v < 0:
            lo_v = 0
        if hi_v > nv - 1:
            hi_v = nv - 1
        if lo_u > hi_u or lo_v > hi_v:
            continue
        e0x = b0 - a0
        e0y = b1 - a1
        e1x = c0 - b0
        e1y = c1 - b1
        e2x = a0 - c0
        e2y = a1 - c1
        for iu in range(lo_u, hi_u + 1):
            qu = ou + h * iu
            for iv in range(lo_v, hi_v + 1):
                qv = ov + h * iv
                e_a = e0x * (qv - a1) - e0y * (qu - a0)
                inside = (e_a > 0.0) or (e_a == 0.0 and _fill_rule(e0x, e0y))
                if inside:
                    e_b = e1x * (qv - b1) - e1y * (qu - b0)
                    inside = (e_b > 0.0) or (e_b == 0.0 and _fill_rule(e1x, e1y))
                if inside:
                    e_c = e2x * (qv - c1) - e2y * (qu - c0)
                    inside = (e_c > 0.0) or (e_c == 0.0 and _fill_rule(e2x, e2y))
                if inside:
                    counts[iu * nv + iv] += 1


# ---------------------------------------------------------------------------
# Ray / segment intersection counting (Moller-Trumbore).
# ---------------------------------------------------------------------------

cdef long _ray_crossings(const double* p, const double* d,
                         double[:, ::1] V, long[:, ::1] F,
                         double t_lo, double t_hi) nogil:
    cdef long n_tri = F.shape[0]
    cdef long t, count = 0
    cdef double e1[3], e2[3], pvec[3], tvec[3], qvec[3]
    cdef double det, inv_det, u, v, tt
    cdef const double* A
    for t in range(n_tri):
        A = &V[F[t, 0], 0]
        _sub3(&V[F[t, 1], 0], A, e1)
        _sub3(&V[F[t, 2], 0], A, e2)
        _cross3(d, e2, pvec)
        det = _dot3(e1, pvec)
        if det > -DET_EPS and det < DET_EPS:
            continue
        inv_det = 1.0 / det
        _sub3(p, A, tvec)
        u = _dot3(tvec, pvec) * inv_det
        if u < 0.0 or u > 1.0:
            continue
        _cross3(tvec, e1, qvec)
        v = _dot3(qvec, d) * inv_det
        if v < 0.0 or u + v > 1.0:
            continue
        tt = _dot3(qvec, e2) * inv_det
        if tt > t_lo and tt < t_hi:
            count += 1
    return count


_RAY_DIRS = np.array(
    [
        [0.5377671873, 0.8323712354, 0.1341231123],
        [-0.2931457812, 0.3415210031, 0.8930123471],
        [0.7712356214, -0.4123405634, 0.4854312394],
    ]
)


def points_inside_mesh(points, V, F):
    """Watertight containment test, parity along 3 fixed rays, majority vote."""
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] Vv = np.ascontiguousarray(V, dtype=np.float64)
    cdef long[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.int64)
    cdef double[:, ::1] D = np.ascontiguousarray(_RAY_DIRS)
    cdef long n = P.shape[0]
    votes_arr = np.zeros(n, dtype=np.int8)
    cdef cnp.int8_t[::1] votes = votes_arr
    cdef long i, r
    with nogil:
        for i in range(n):
            for r in range(3):
                if _ray_crossings(&P[i, 0], &D[r, 0], Vv, Fv, 0.0, 1e300) % 2 == 1:
                    votes[i] += 1
    return votes_arr >= 2


def segment_mesh_crossings(starts, ends, V, F, double t_lo=1e-9, t_hi=None):
    """Count proper triangle crossings of each segment, params in (t_lo, t_hi)."""
    cdef double[:, ::1] S = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[:, ::1] E = np.ascontiguousarray(ends, dtype=np.float64)
    cdef double[:, ::1] Vv = np.ascontiguousarray(V, dtype=np.float64)
    cdef long[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.int64)
    cdef double hi = 1.0 - t_lo if t_hi is None else float(t_hi)
    cdef long n = S.shape[0]
    out = np.zeros(n, dtype=np.int64)
    cdef long[::1] ov = out
    cdef long i
    cdef double d[3]
    with nogil:
        for i in range(n):
            d[0] = E[i, 0] - S[i, 0]
            d[1] = E[i, 1] - S[i, 1]
            d[2] = E[i, 2] - S[i, 2]
            ov[i] = _ray_crossings(&S[i, 0], &d[0], Vv, Fv, t_lo, hi)
    return out
