"""Pure-Python geometry kernels.

Twin of the compiled ``_kernels`` extension: identical function signatures and
identical results. Exactness comes from Python's arbitrary-precision integers,
so these functions accept any integer coordinates. Array arguments may be
numpy arrays or plain sequences; they are normalised to Python ints up front
to avoid silent fixed-width overflow.
"""

from __future__ import annotations


def _ints(seq):
    return [int(v) for v in seq]


def orient(ax, ay, bx, by, cx, cy):
    """Sign of the cross product (b - a) x (c - a): +1 left turn, -1 right, 0 collinear."""
    cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (cross > 0) - (cross < 0)


def segments_properly_cross(ax, ay, bx, by, cx, cy, dx, dy):
    """True iff open segments ab and cd intersect in one interior point of both."""
    o1 = orient(ax, ay, bx, by, cx, cy)
    o2 = orient(ax, ay, bx, by, dx, dy)
    if o1 * o2 >= 0:
        return False
    o3 = orient(cx, cy, dx, dy, ax, ay)
    o4 = orient(cx, cy, dx, dy, bx, by)
    return o3 * o4 < 0


def point_on_open_segment(px, py, ax, ay, bx, by):
    """True iff p lies strictly between a and b on segment ab."""
    if orient(ax, ay, bx, by, px, py) != 0:
        return False
    return (px - ax) * (px - bx) + (py - ay) * (py - by) < 0


def point_blocks_triangle(px, py, ax, ay, bx, by, cx, cy):
    """True iff p lies strictly inside triangle abc or strictly inside one of its edges.

    The triangle must be non-degenerate and p must not coincide with a vertex.
    """
    if orient(ax, ay, bx, by, cx, cy) < 0:
        bx, by, cx, cy = cx, cy, bx, by
    if orient(ax, ay, bx, by, px, py) < 0:
        return False
    if orient(bx, by, cx, cy, px, py) < 0:
        return False
    if orient(cx, cy, ax, ay, px, py) < 0:
        return False
    return True


def count_crossings(segs_a, segs_b):
    """Number of pairs (e in segs_a, f in segs_b) that properly cross.

    Each segment is a row (x1, y1, x2, y2).
    """
    rows_a = [tuple(_ints(r)) for r in segs_a]
    rows_b = [tuple(_ints(r)) for r in segs_b]
    total = 0
    for ax, ay, bx, by in rows_a:
        for cx, cy, dx, dy in rows_b:
            if segments_properly_cross(ax, ay, bx, by, cx, cy, dx, dy):
                total += 1
    return total


def count_crossings_one(x1, y1, x2, y2, segs):
    """Number of segments in `segs` properly crossed by the single segment."""
    x1, y1, x2, y2 = int(x1), int(y1), int(x2), int(y2)
    total = 0
    for r in segs:
        cx, cy, dx, dy = _ints(r)
        if segments_properly_cross(x1, y1, x2, y2, cx, cy, dx, dy):
            total += 1
    return total


def first_crossing(segs):
    """First pair of indices (i, j), i < j, whose segments properly cross; (-1, -1) if none."""
    rows = [tuple(_ints(r)) for r in segs]
    k = len(rows)
    for i in range(k):
        ax, ay, bx, by = rows[i]
        for j in range(i + 1, k):
            cx, cy, dx, dy = rows[j]
            if segments_properly_cross(ax, ay, bx, by, cx, cy, dx, dy):
                return (i, j)
    return (-1, -1)


def enumerate_quads(xs, ys, cellx, celly):
    """Enumerate all empty quadrilaterals over the point set.

    Returns a list of tuples (a, b, c, d, convex) where {a, c} is the recorded
    diagonal (the lexicographically smaller one for convex quads, the unique
    interior one otherwise), {b, d} the opposite vertex pair, and a < c, b < d.
    Cell coordinates drive the uniform-grid emptiness scans; when the grid
    would be too sparse the scan falls back to a bounding-box filtered pass
    over all points, with identical results.
    """
    xs = _ints(xs)
    ys = _ints(ys)
    cellx = _ints(cellx)
    celly = _ints(celly)
    n = len(xs)
    if n < 4:
        return []

    ncx = max(cellx) + 1
    ncy = max(celly) + 1
    use_grid = ncx * ncy <= max(4096, 64 * n)
    if use_grid:
        counts = [0] * (ncx * ncy + 1)
        for i in range(n):
            counts[cellx[i] * ncy + celly[i] + 1] += 1
        for c in range(1, len(counts)):
            counts[c] += counts[c - 1]
        order = [0] * n
        fill = counts[:]
        for i in range(n):
            cid = cellx[i] * ncy + celly[i]
            order[fill[cid]] = i
            fill[cid] += 1
    else:
        counts = order = None

    def candidates(pts):
        if not use_grid:
            return range(n)
        cxlo = min(cellx[p] for p in pts)
        cxhi = max(cellx[p] for p in pts)
        cylo = min(celly[p] for p in pts)
        cyhi = max(celly[p] for p in pts)
        out = []
        for cx in range(cxlo, cxhi + 1):
            base = cx * ncy
            for cy in range(cylo, cyhi + 1):
                cid = base + cy
                out.extend(order[counts[cid]:counts[cid + 1]])
        return out

    def tri_empty(p, q, r):
        px, py = xs[p], ys[p]
        qx, qy = xs[q], ys[q]
        rx, ry = xs[r], ys[r]
        if (qx - px) * (ry - py) - (qy - py) * (rx - px) < 0:
            qx, qy, rx, ry = rx, ry, qx, qy
        xlo = min(px, qx, rx)
        xhi = max(px, qx, rx)
        ylo = min(py, qy, ry)
        yhi = max(py, qy, ry)
        for t in candidates((p, q, r)):
            if t == p or t == q or t == r:
                continue
            tx, ty = xs[t], ys[t]
            if tx < xlo or tx > xhi or ty < ylo or ty > yhi:
                continue
            if (qx - px) * (ty - py) - (qy - py) * (tx - px) < 0:
                continue
            if (rx - qx) * (ty - qy) - (ry - qy) * (tx - qx) < 0:
                continue
            if (px - rx) * (ty - ry) - (py - ry) * (tx - rx) < 0:
                continue
            return False
        return True

    def seg_empty(p, q):
        px, py = xs[p], ys[p]
        qx, qy = xs[q], ys[q]
        xlo, xhi = (px, qx) if px <= qx else (qx, px)
        ylo, yhi = (py, qy) if py <= qy else (qy, py)
        for t in candidates((p, q)):
            if t == p or t == q:
                continue
            tx, ty = xs[t], ys[t]
            if tx < xlo or tx > xhi or ty < ylo or ty > yhi:
                continue
            if (qx - px) * (ty - py) - (qy - py) * (tx - px) != 0:
                continue
            if (tx - px) * (tx - qx) + (ty - py) * (ty - qy) < 0:
                return False
        return True

    def straddles(p0, p1, q0, q1):
        o1 = orient(xs[p0], ys[p0], xs[p1], ys[p1], xs[q0], ys[q0])
        o2 = orient(xs[p0], ys[p0], xs[p1], ys[p1], xs[q1], ys[q1])
        return o1 * o2 < 0

    quads = []
    for a in range(n - 3):
        for b in range(a + 1, n - 2):
            for c in range(b + 1, n - 1):
                for d in range(c + 1, n):
                    for p0, p1, q0, q1 in ((a, b, c, d), (a, c, b, d), (a, d, b, c)):
                        sep_p = straddles(p0, p1, q0, q1)
                        sep_q = straddles(q0, q1, p0, p1)
                        if sep_p and sep_q:
                            convex = 1
                            if (p0, p1) <= (q0, q1):
                                dg0, dg1, ot0, ot1 = p0, p1, q0, q1
                            else:
                                dg0, dg1, ot0, ot1 = q0, q1, p0, p1
                        elif sep_p:
                            convex = 0
                            dg0, dg1, ot0, ot1 = p0, p1, q0, q1
                        elif sep_q:
                            convex = 0
                            dg0, dg1, ot0, ot1 = q0, q1, p0, p1
                        else:
                            continue
                        if not tri_empty(dg0, dg1, ot0):
                            continue
                        if not tri_empty(dg0, dg1, ot1):
                            continue
                        if not seg_empty(dg0, dg1):
                            continue
                        quads.append((dg0, ot0, dg1, ot1, convex))
    return quads
