# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels.

Twin of ``_kernels_py`` with identical signatures and results. Intermediate
products are evaluated in 128-bit integers, so all predicates are exact for
coordinates up to |c| <= 2**31 - 1 (the package enforces |c| <= 2**30).
"""

cdef extern from *:
    ctypedef long long i128 "__int128"

import numpy as np


cdef inline int _sign(i128 v) noexcept nogil:
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


cdef inline int _orient(long long ax, long long ay, long long bx, long long by,
                        long long cx, long long cy) noexcept nogil:
    cdef i128 cross = (<i128> (bx - ax)) * (<i128> (cy - ay)) \
        - (<i128> (by - ay)) * (<i128> (cx - ax))
    return _sign(cross)


cdef inline bint _cross_proper(long long ax, long long ay, long long bx, long long by,
                               long long cx, long long cy, long long dx, long long dy) noexcept nogil:
    cdef int o1 = _orient(ax, ay, bx, by, cx, cy)
    cdef int o2 = _orient(ax, ay, bx, by, dx, dy)
    if o1 * o2 >= 0:
        return False
    cdef int o3 = _orient(cx, cy, dx, dy, ax, ay)
    cdef int o4 = _orient(cx, cy, dx, dy, bx, by)
    return o3 * o4 < 0


def orient(long long ax, long long ay, long long bx, long long by,
           long long cx, long long cy):
    """Sign of the cross product (b - a) x (c - a): +1 left turn, -1 right, 0 collinear."""
    return _orient(ax, ay, bx, by, cx, cy)


def segments_properly_cross(long long ax, long long ay, long long bx, long long by,
                            long long cx, long long cy, long long dx, long long dy):
    """True iff open segments ab and cd intersect in one interior point of both."""
    return _cross_proper(ax, ay, bx, by, cx, cy, dx, dy)


def point_on_open_segment(long long px, long long py, long long ax, long long ay,
                          long long bx, long long by):
    """True iff p lies strictly between a and b on segment ab."""
    if _orient(ax, ay, bx, by, px, py) != 0:
        return False
    cdef i128 dot = (<i128> (px - ax)) * (<i128> (px - bx)) \
        + (<i128> (py - ay)) * (<i128> (py - by))
    return dot < 0


def point_blocks_triangle(long long px, long long py, long long ax, long long ay,
                          long long bx, long long by, long long cx, long long cy):
    """True iff p lies strictly inside triangle abc or strictly inside one of its edges."""
    cdef long long tx, ty
    if _orient(ax, ay, bx, by, cx, cy) < 0:
        tx = bx; ty = by
        bx = cx; by = cy
        cx = tx; cy = ty
    if _orient(ax, ay, bx, by, px, py) < 0:
        return False
    if _orient(bx, by, cx, cy, px, py) < 0:
        return False
    if _orient(cx, cy, ax, ay, px, py) < 0:
        return False
    return True


def count_crossings(segs_a, segs_b):
    """Number of pairs (e in segs_a, f in segs_b) that properly cross."""
    cdef const long long[:, ::1] a = np.ascontiguousarray(segs_a, dtype=np.int64)
    cdef const long long[:, ::1] b = np.ascontiguousarray(segs_b, dtype=np.int64)
    cdef Py_ssize_t i, j
    cdef long long total = 0
    with nogil:
        for i in range(a.shape[0]):
            for j in range(b.shape[0]):
                if _cross_proper(a[i, 0], a[i, 1], a[i, 2], a[i, 3],
                                 b[j, 0], b[j, 1], b[j, 2], b[j, 3]):
                    total += 1
    return total


def count_crossings_one(long long x1, long long y1, long long x2, long long y2, segs):
    """Number of segments in `segs` properly crossed by the single segment."""
    cdef const long long[:, ::1] b = np.ascontiguousarray(segs, dtype=np.int64)
    cdef Py_ssize_t j
    cdef long long total = 0
    with nogil:
        for j in range(b.shape[0]):
            if _cross_proper(x1, y1, x2, y2, b[j, 0], b[j, 1], b[j, 2], b[j, 3]):
                total += 1
    return total


def first_crossing(segs):
    """First pair of indices (i, j), i < j, whose segments properly cross; (-1, -1) if none."""
    cdef const long long[:, ::1] a = np.ascontiguousarray(segs, dtype=np.int64)
    cdef Py_ssize_t i, j
    for i in range(a.shape[0]):
        for j in range(i + 1, a.shape[0]):
            if _cross_proper(a[i, 0], a[i, 1], a[i, 2], a[i, 3],
                             a[j, 0], a[j, 1], a[j, 2], a[j, 3]):
                return (i, j)
    return (-1, -1)


cdef bint _tri_empty(const long long[::1] xs, const long long[::1] ys,
                     const long long[::1] cellx, const long long[::1] celly,
                     const long long[::1] counts, const long long[::1] order,
                     bint use_grid, long long ncy,
                     Py_ssize_t p, Py_ssize_t q, Py_ssize_t r) noexcept nogil:
    cdef long long px = xs[p], py = ys[p]
    cdef long long qx = xs[q], qy = ys[q]
    cdef long long rx = xs[r], ry = ys[r]
    cdef long long tx, ty, sx, sy
    cdef long long xlo, xhi, ylo, yhi
    cdef long long cxlo, cxhi, cylo, cyhi, cx, cy, cid
    cdef Py_ssize_t t, k, n = xs.shape[0]
    if _orient(px, py, qx, qy, rx, ry) < 0:
        sx = qx; sy = qy
        qx = rx; qy = ry
        rx = sx; ry = sy
    xlo = min(px, min(qx, rx)); xhi = max(px, max(qx, rx))
    ylo = min(py, min(qy, ry)); yhi = max(py, max(qy, ry))
    if use_grid:
        cxlo = min(cellx[p], min(cellx[q], cellx[r]))
        cxhi = max(cellx[p], max(cellx[q], cellx[r]))
        cylo = min(celly[p], min(celly[q], celly[r]))
        cyhi = max(celly[p], max(celly[q], celly[r]))
        for cx in range(cxlo, cxhi + 1):
            for cy in range(cylo, cyhi + 1):
                cid = cx * ncy + cy
                for k in range(counts[cid], counts[cid + 1]):
                    t = <Py_ssize_t> order[k]
                    if t == p or t == q or t == r:
                        continue
                    tx = xs[t]; ty = ys[t]
                    if tx < xlo or tx > xhi or ty < ylo or ty > yhi:
                        continue
                    if _orient(px, py, qx, qy, tx, ty) < 0:
                        continue
                    if _orient(qx, qy, rx, ry, tx, ty) < 0:
                        continue
                    if _orient(rx, ry, px, py, tx, ty) < 0:
                        continue
                    return False
        return True
    for t in range(n):
        if t == p or t == q or t == r:
            continue
        tx = xs[t]; ty = ys[t]
        if tx < xlo or tx > xhi or ty < ylo or ty > yhi:
            continue
        if _orient(px, py, qx, qy, tx, ty) < 0:
            continue
        if _orient(qx, qy, rx, ry, tx, ty) < 0:
            continue
        if _orient(rx, ry, px, py, tx, ty) < 0:
            continue
        return False
    return True


cdef bint _seg_empty(const long long[::1] xs, const long long[::1] ys,
                     const long long[::1] cellx, const long long[::1] celly,
                     const long long[::1] counts, const long long[::1] order,
                     bint use_grid, long long ncy,
                     Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef long long px = xs[p], py = ys[p]
    cdef long long qx = xs[q], qy = ys[q]
    cdef long long tx, ty
    cdef long long xlo, xhi, ylo, yhi
    cdef long long cxlo, cxhi, cylo, cyhi, cx, cy, cid
    cdef i128 dot
    cdef Py_ssize_t t, k, n = xs.shape[0]
    xlo = min(px, qx); xhi = max(px, qx)
    ylo = min(py, qy); yhi = max(py, qy)
    if use_grid:
        cxlo = min(cellx[p], cellx[q]); cxhi = max(cellx[p], cellx[q])
        cylo = min(celly[p], celly[q]); cyhi = max(celly[p], celly[q])
        for cx in range(cxlo, cxhi + 1):
            for cy in range(cylo, cyhi + 1):
                cid = cx * ncy + cy
                for k in range(counts[cid], counts[cid + 1]):
                    t = <Py_ssize_t> order[k]
                    if t == p or t == q:
                        continue
                    tx = xs[t]; ty = ys[t]
                    if tx < xlo or tx > xhi or ty < ylo or ty > yhi:
                        continue
                    if _orient(px, py, qx, qy, tx, ty) != 0:
                        continue
                    dot = (<i128> (tx - px)) * (<i128> (tx - qx)) \
                        + (<i128> (ty - py)) * (<i128> (ty - qy))
                    if dot < 0:
                        return False
        return True
    for t in range(n):
        if t == p or t == q:
            continue
        tx = xs[t]; ty = ys[t]
        if tx < xlo or tx > xhi or ty < ylo or ty > yhi:
            continue
        if _orient(px, py, qx, qy, tx, ty) != 0:
            continue
        dot = (<i128> (tx - px)) * (<i128> (tx - qx)) \
            + (<i128> (ty - py)) * (<i128> (ty - qy))
        if dot < 0:
            return False
    return True


def enumerate_quads(xs_in, ys_in, cellx_in, celly_in):
    """Enumerate all empty quadrilaterals over the point set.

    Returns a list of tuples (a, b, c, d, convex); see the pure twin for the
    canonical vertex convention.
    """
    cdef const long long[::1] xs = np.ascontiguousarray(xs_in, dtype=np.int64)
    cdef const long long[::1] ys = np.ascontiguousarray(ys_in, dtype=np.int64)
    cdef const long long[::1] cellx = np.ascontiguousarray(cellx_in, dtype=np.int64)
    cdef const long long[::1] celly = np.ascontiguousarray(celly_in, dtype=np.int64)
    cdef Py_ssize_t n = xs.shape[0]
    if n < 4:
        return []

    cdef long long ncx = 0, ncy = 0
    cdef Py_ssize_t i
    for i in range(n):
        if cellx[i] >= ncx:
            ncx = cellx[i] + 1
        if celly[i] >= ncy:
            ncy = celly[i] + 1
    cdef bint use_grid = ncx * ncy <= max(4096, 64 * n)

    cdef long long[::1] counts
    cdef long long[::1] order
    cdef long long cid
    if use_grid:
        counts = np.zeros(ncx * ncy + 1, dtype=np.int64)
        order = np.zeros(n, dtype=np.int64)
        for i in range(n):
            counts[cellx[i] * ncy + celly[i] + 1] += 1
        for i in range(1, counts.shape[0]):
            counts[i] += counts[i - 1]
        fill = np.asarray(counts).copy()
        for i in range(n):
            cid = cellx[i] * ncy + celly[i]
            order[fill[cid]] = i
            fill[cid] += 1
    else:
        counts = np.zeros(1, dtype=np.int64)
        order = np.zeros(1, dtype=np.int64)

    cdef Py_ssize_t a, b, c, d, s
    cdef Py_ssize_t p0, p1, q0, q1, dg0, dg1, ot0, ot1
    cdef int o1, o2, o3, o4
    cdef bint sep_p, sep_q
    cdef int convex
    quads = []
    for a in range(n - 3):
        for b in range(a + 1, n - 2):
            for c in range(b + 1, n - 1):
                for d in range(c + 1, n):
                    for s in range(3):
                        if s == 0:
                            p0 = a; p1 = b; q0 = c; q1 = d
                        elif s == 1:
                            p0 = a; p1 = c; q0 = b; q1 = d
                        else:
                            p0 = a; p1 = d; q0 = b; q1 = c
                        o1 = _orient(xs[p0], ys[p0], xs[p1], ys[p1], xs[q0], ys[q0])
                        o2 = _orient(xs[p0], ys[p0], xs[p1], ys[p1], xs[q1], ys[q1])
                        sep_p = o1 * o2 < 0
                        o3 = _orient(xs[q0], ys[q0], xs[q1], ys[q1], xs[p0], ys[p0])
                        o4 = _orient(xs[q0], ys[q0], xs[q1], ys[q1], xs[p1], ys[p1])
                        sep_q = o3 * o4 < 0
                        if sep_p and sep_q:
                            convex = 1
                            if (p0, p1) <= (q0, q1):
                                dg0 = p0; dg1 = p1; ot0 = q0; ot1 = q1
                            else:
                                dg0 = q0; dg1 = q1; ot0 = p0; ot1 = p1
                        elif sep_p:
                            convex = 0
                            dg0 = p0; dg1 = p1; ot0 = q0; ot1 = q1
                        elif sep_q:
                            convex = 0
                            dg0 = q0; dg1 = q1; ot0 = p0; ot1 = p1
                        else:
                            continue
                        if not _tri_empty(xs, ys, cellx, celly, counts, order,
                                          use_grid, ncy, dg0, dg1, ot0):
                            continue
                        if not _tri_empty(xs, ys, cellx, celly, counts, order,
                                          use_grid, ncy, dg0, dg1, ot1):
                            continue
                        if not _seg_empty(xs, ys, cellx, celly, counts, order,
                                          use_grid, ncy, dg0, dg1):
                            continue
                        quads.append((dg0, ot0, dg1, ot1, convex))
    return quads
