"""Exact integer geometry: predicates, convex hull, the uniform spatial-hash
grid, and enumeration of empty convex / non-convex quadrilaterals.

All predicates are exact; there are no epsilons anywhere. Collinear triples
are tolerated throughout (they simply never form quadrilaterals), but a point
set whose points are all collinear admits no triangulation and is rejected.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Iterable, NamedTuple, Optional

import numpy as np

from . import kernels

COORD_LIMIT = 1 << 30

Edge = tuple[int, int]


class Point(NamedTuple):
    x: int
    y: int


def edge(u: int, v: int) -> Edge:
    """Normalised edge key with u < v."""
    return (u, v) if u < v else (v, u)


def orient(p: Point, q: Point, r: Point) -> int:
    """Sign of (q - p) x (r - p): +1 left turn, -1 right turn, 0 collinear."""
    return kernels.orient(p[0], p[1], q[0], q[1], r[0], r[1])


def segments_properly_cross(e1: tuple[Point, Point], e2: tuple[Point, Point]) -> bool:
    """True iff the open segments intersect in exactly one interior point of both."""
    (a, b), (c, d) = e1, e2
    return kernels.segments_properly_cross(a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1])


def convex_hull(points: list[Point]) -> list[int]:
    """Indices of the convex hull in counter-clockwise order.

    Points lying strictly inside a hull edge are kept on the boundary walk:
    they are triangulation vertices and subdivide that hull edge.
    """
    n = len(points)
    if n == 1:
        return [0]
    idx = sorted(range(n), key=lambda i: points[i])
    if n == 2:
        return idx

    def build(seq):
        chain: list[int] = []
        for i in seq:
            while len(chain) >= 2 and orient(points[chain[-2]], points[chain[-1]], points[i]) < 0:
                chain.pop()
            chain.append(i)
        return chain

    lower = build(idx)
    upper = build(reversed(idx))
    return lower[:-1] + upper[:-1]


@dataclass(eq=False)
class PointSet:
    """Immutable planar point set with its convex hull.

    `hull` lists boundary points counter-clockwise, including points interior
    to hull edges; `hull_edges` are the consecutive boundary pairs.
    """

    points: tuple[Point, ...]
    hull: tuple[int, ...]
    hull_edges: frozenset[Edge]
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)

    @classmethod
    def from_points(cls, raw: Iterable[tuple[int, int]]) -> "PointSet":
        pts = tuple(Point(int(x), int(y)) for x, y in raw)
        if not pts:
            raise ValueError("empty point set")
        for p in pts:
            if abs(p.x) > COORD_LIMIT or abs(p.y) > COORD_LIMIT:
                raise ValueError(f"coordinate out of supported range (|c| <= 2**30): {p}")
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate points")
        hull = convex_hull(list(pts))
        if len(pts) >= 3:
            area2 = 0
            for i in range(len(hull)):
                a = pts[hull[i]]
                b = pts[hull[(i + 1) % len(hull)]]
                area2 += a.x * b.y - b.x * a.y
            if area2 <= 0:
                raise ValueError("all points are collinear; no triangulation exists")
        hull_edges = frozenset(
            edge(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull))
        ) if len(hull) >= 2 else frozenset()
        xs = np.array([p.x for p in pts], dtype=np.int64)
        ys = np.array([p.y for p in pts], dtype=np.int64)
        return cls(points=pts, hull=tuple(hull), hull_edges=hull_edges, xs=xs, ys=ys)

    def __len__(self) -> int:
        return len(self.points)

    def coords(self, e: Edge) -> tuple[int, int, int, int]:
        a, b = self.points[e[0]], self.points[e[1]]
        return (a.x, a.y, b.x, b.y)

    def seg_array(self, edges: Iterable[Edge]) -> np.ndarray:
        rows = [self.coords(e) for e in edges]
        return np.array(rows, dtype=np.int64).reshape(-1, 4)


@dataclass
class Grid:
    """Uniform spatial hash over the point set's bounding box.

    The square cell side is s = sqrt(w * h / N), floored to 1 when the box is
    degenerate; cell coordinates are computed exactly (integer square roots on
    the rational s^2 = area / N), never through floats.
    """

    xmin: int
    ymin: int
    area: int
    npoints: int
    buckets: dict[tuple[int, int], list[int]]
    cellx: np.ndarray = field(repr=False)
    celly: np.ndarray = field(repr=False)

    @property
    def degenerate(self) -> bool:
        return self.area == 0

    @property
    def cell_side_sq(self) -> Fraction:
        return Fraction(1) if self.degenerate else Fraction(self.area, self.npoints)

    @property
    def cell_side(self) -> float:
        return float(self.cell_side_sq) ** 0.5

    def cell_coord(self, dx: int) -> int:
        """floor(dx / s) for dx >= 0, computed exactly."""
        if self.degenerate:
            return dx
        return isqrt(dx * dx * self.npoints // self.area)

    def cell_of(self, x: int, y: int) -> tuple[int, int]:
        return (self.cell_coord(x - self.xmin), self.cell_coord(y - self.ymin))


def build_grid(ps: PointSet) -> Grid:
    xs = [p.x for p in ps.points]
    ys = [p.y for p in ps.points]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    area = (xmax - xmin) * (ymax - ymin)
    grid = Grid(xmin=xmin, ymin=ymin, area=area, npoints=len(ps), buckets={},
                cellx=np.zeros(len(ps), dtype=np.int64),
                celly=np.zeros(len(ps), dtype=np.int64))
    for i, p in enumerate(ps.points):
        c = grid.cell_of(p.x, p.y)
        grid.buckets.setdefault(c, []).append(i)
        grid.cellx[i] = c[0]
        grid.celly[i] = c[1]
    return grid


def points_in_box(ps: PointSet, grid: Grid, box: tuple[int, int, int, int]) -> list[int]:
    """Indices of points inside the closed axis-aligned box (xlo, ylo, xhi, yhi)."""
    xlo, ylo, xhi, yhi = box
    if xlo > xhi or ylo > yhi:
        return []
    cxlo = grid.cell_coord(max(0, xlo - grid.xmin))
    cxhi = grid.cell_coord(max(0, xhi - grid.xmin))
    cylo = grid.cell_coord(max(0, ylo - grid.ymin))
    cyhi = grid.cell_coord(max(0, yhi - grid.ymin))
    out: list[int] = []
    span = (cxhi - cxlo + 1) * (cyhi - cylo + 1)
    if span > len(grid.buckets):
        cells: Iterable[list[int]] = (
            b for (cx, cy), b in grid.buckets.items()
            if cxlo <= cx <= cxhi and cylo <= cy <= cyhi
        )
    else:
        cells = (
            grid.buckets.get((cx, cy), ())
            for cx in range(cxlo, cxhi + 1)
            for cy in range(cylo, cyhi + 1)
        )
    for bucket in cells:
        for i in bucket:
            p = ps.points[i]
            if xlo <= p.x <= xhi and ylo <= p.y <= yhi:
                out.append(i)
    return sorted(out)


def _bucket_candidates(ps: PointSet, grid: Grid, pts: tuple[int, ...]) -> Iterable[int]:
    cxlo = min(int(grid.cellx[i]) for i in pts)
    cxhi = max(int(grid.cellx[i]) for i in pts)
    cylo = min(int(grid.celly[i]) for i in pts)
    cyhi = max(int(grid.celly[i]) for i in pts)
    span = (cxhi - cxlo + 1) * (cyhi - cylo + 1)
    if span > len(grid.buckets):
        for (cx, cy), bucket in grid.buckets.items():
            if cxlo <= cx <= cxhi and cylo <= cy <= cyhi:
                yield from bucket
    else:
        for cx in range(cxlo, cxhi + 1):
            for cy in range(cylo, cyhi + 1):
                yield from grid.buckets.get((cx, cy), ())


def triangle_empty(ps: PointSet, grid: Grid, a: int, b: int, c: int) -> bool:
    """True iff no other point lies strictly inside triangle abc or strictly
    inside one of its edges."""
    pa, pb, pc = ps.points[a], ps.points[b], ps.points[c]
    if orient(pa, pb, pc) == 0:
        raise ValueError(f"degenerate triangle ({a}, {b}, {c})")
    for t in _bucket_candidates(ps, grid, (a, b, c)):
        if t in (a, b, c):
            continue
        pt = ps.points[t]
        if kernels.point_blocks_triangle(pt.x, pt.y, pa.x, pa.y, pb.x, pb.y, pc.x, pc.y):
            return False
    return True


def segment_empty(ps: PointSet, grid: Grid, a: int, b: int) -> bool:
    """True iff no point lies strictly between a and b on segment ab."""
    pa, pb = ps.points[a], ps.points[b]
    for t in _bucket_candidates(ps, grid, (a, b)):
        if t in (a, b):
            continue
        pt = ps.points[t]
        if kernels.point_on_open_segment(pt.x, pt.y, pa.x, pa.y, pb.x, pb.y):
            return False
    return True


@dataclass(frozen=True)
class Quad:
    """Empty quadrilateral: two edge-adjacent empty triangles.

    verts = (a, b, c, d) in boundary order; {a, c} is the recorded interior
    diagonal (the lexicographically smaller one when convex), {b, d} the
    opposite vertex pair. Convex quads have both diagonals interior.
    """

    verts: tuple[int, int, int, int]
    boundary: tuple[Edge, Edge, Edge, Edge]
    diagonals: tuple[Edge, ...]
    convex: bool
    empty: bool = True

    @property
    def vertex_set(self) -> tuple[int, ...]:
        return tuple(sorted(self.verts))

    def other_diagonal(self, e: Edge) -> Edge:
        a, b, c, d = self.verts
        if e == edge(a, c):
            return edge(b, d)
        if e == edge(b, d):
            return edge(a, c)
        raise ValueError(f"{e} is not a diagonal of this quad")

    def triangles(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        """The two triangles split by the recorded diagonal, as sorted triples."""
        a, b, c, d = self.verts
        return (tuple(sorted((a, c, b))), tuple(sorted((a, c, d))))


def _make_quad(a: int, b: int, c: int, d: int, convex: bool) -> Quad:
    diagonals = (edge(a, c), edge(b, d)) if convex else (edge(a, c),)
    return Quad(
        verts=(a, b, c, d),
        boundary=(edge(a, b), edge(b, c), edge(c, d), edge(d, a)),
        diagonals=diagonals,
        convex=convex,
    )


@dataclass
class QuadCatalog:
    """All empty quadrilaterals of a point set, with lookup indexes."""

    quads: tuple[Quad, ...]
    by_diagonal: dict[Edge, tuple[int, ...]]
    by_vertex_quadruple: dict[tuple[int, int, int, int], tuple[int, ...]]
    convex_by_diagonal: dict[Edge, tuple[int, ...]]
    convex_by_triple: dict[tuple[int, int, int], tuple[int, ...]]

    @classmethod
    def from_quads(cls, quads: list[Quad]) -> "QuadCatalog":
        quads = sorted(quads, key=lambda q: q.verts)
        by_diag: dict[Edge, list[int]] = {}
        by_quadruple: dict[tuple[int, int, int, int], list[int]] = {}
        convex_by_diag: dict[Edge, list[int]] = {}
        convex_by_triple: dict[tuple[int, int, int], list[int]] = {}
        for qid, q in enumerate(quads):
            for dg in q.diagonals:
                by_diag.setdefault(dg, []).append(qid)
                if q.convex:
                    convex_by_diag.setdefault(dg, []).append(qid)
            by_quadruple.setdefault(q.vertex_set, []).append(qid)
            if q.convex:
                vs = q.vertex_set
                for skip in range(4):
                    triple = tuple(v for k, v in enumerate(vs) if k != skip)
                    convex_by_triple.setdefault(triple, []).append(qid)
        return cls(
            quads=tuple(quads),
            by_diagonal={k: tuple(v) for k, v in by_diag.items()},
            by_vertex_quadruple={k: tuple(v) for k, v in by_quadruple.items()},
            convex_by_diagonal={k: tuple(v) for k, v in convex_by_diag.items()},
            convex_by_triple={k: tuple(v) for k, v in convex_by_triple.items()},
        )

    def __len__(self) -> int:
        return len(self.quads)

    def convex_quads_with_diagonal(self, e: Edge) -> list[Quad]:
        return [self.quads[i] for i in self.convex_by_diagonal.get(e, ())]


def enumerate_quads(ps: PointSet, grid: Grid) -> QuadCatalog:
    """Enumerate every empty convex and non-convex quadrilateral.

    For each 4-subset, each of the three pairings is tested by strict
    separation; a pairing whose opposite pair straddles the diagonal's line
    yields a candidate quad, convex iff the reverse separation also holds.
    Candidates are kept iff both triangles and the diagonal segment are empty.
    """
    raw = kernels.enumerate_quads(ps.xs, ps.ys, grid.cellx, grid.celly)
    return QuadCatalog.from_quads([_make_quad(a, b, c, d, bool(cv)) for a, b, c, d, cv in raw])


def empty_segments(ps: PointSet, grid: Grid) -> list[Edge]:
    """All point pairs whose open segment contains no other point: exactly the
    edges that can appear in some triangulation."""
    n = len(ps)
    return [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if segment_empty(ps, grid, u, v)
    ]


def crossing_pairs(ps: PointSet, edges: list[Edge]) -> list[tuple[Edge, Edge]]:
    """All unordered pairs from `edges` that properly cross."""
    pts = ps.points
    out = []
    for i, e in enumerate(edges):
        a, b = pts[e[0]], pts[e[1]]
        for f in edges[i + 1:]:
            c, d = pts[f[0]], pts[f[1]]
            if kernels.segments_properly_cross(a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y):
                out.append((e, f))
    return out


CACHE_MAGIC = "tricenter-quadcache"
CACHE_VERSION = 1


def pointset_digest(ps: PointSet) -> str:
    payload = ";".join(f"{p.x},{p.y}" for p in ps.points).encode()
    return hashlib.sha256(payload).hexdigest()


def save_catalog(path, ps: PointSet, cat: QuadCatalog) -> None:
    lines = [f"{CACHE_MAGIC} {CACHE_VERSION} {pointset_digest(ps)}"]
    for q in cat.quads:
        a, b, c, d = q.verts
        lines.append(f"{a} {b} {c} {d} {int(q.convex)}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_catalog(path, ps: PointSet) -> Optional[QuadCatalog]:
    """Load a cached catalog; None when missing, stale or malformed."""
    try:
        with open(path, encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError:
        return None
    if not lines:
        return None
    head = lines[0].split()
    if head[:2] != [CACHE_MAGIC, str(CACHE_VERSION)] or len(head) != 3:
        return None
    if head[2] != pointset_digest(ps):
        return None
    quads = []
    for line in lines[1:]:
        if not line.strip():
            continue
        try:
            a, b, c, d, cv = (int(x) for x in line.split())
        except ValueError:
            return None
        quads.append(_make_quad(a, b, c, d, bool(cv)))
    return QuadCatalog.from_quads(quads)


def load_or_build_catalog(ps: PointSet, grid: Grid, cache_path=None) -> QuadCatalog:
    if cache_path is not None:
        cached = load_catalog(cache_path, ps)
        if cached is not None:
            return cached
    cat = enumerate_quads(ps, grid)
    if cache_path is not None:
        save_catalog(cache_path, ps, cat)
    return cat
