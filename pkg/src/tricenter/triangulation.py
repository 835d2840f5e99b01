"""Triangulations, parallel flips, sequence validation and the brute-force
parallel-flip-distance oracle.

A triangulation is a maximal crossing-free straight-line graph on the point
set; equality is edge-set equality over the same point set. Values are
immutable: flips return new triangulations, with faces re-derived from the
edge set rather than patched.
"""

from __future__ import annotations

import weakref
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .geometry import (
    Edge,
    Grid,
    PointSet,
    Quad,
    QuadCatalog,
    build_grid,
    edge,
    orient,
    triangle_empty,
)

Face = tuple[int, int, int]
ParallelFlip = tuple[Edge, ...]
FlipSequence = tuple[ParallelFlip, ...]


class TriangulationError(ValueError):
    """Structural defect in an edge set or a flip request."""


class DuplicateEdgeError(TriangulationError):
    pass


class CrossingEdgesError(TriangulationError):
    pass


class EdgeThroughPointError(TriangulationError):
    """An edge's open segment contains another point of the set."""


class MissingHullEdgeError(TriangulationError):
    pass


class NotMaximalError(TriangulationError):
    pass


class EdgeNotPresentError(TriangulationError):
    pass


class NotFlippableError(TriangulationError):
    pass


class SharedTriangleError(TriangulationError):
    pass


_GRID_KEEPALIVE: "weakref.WeakKeyDictionary[PointSet, Grid]" = weakref.WeakKeyDictionary()


def grid_for(ps: PointSet) -> Grid:
    """Memoised uniform grid for a point set."""
    grid = _GRID_KEEPALIVE.get(ps)
    if grid is None:
        grid = build_grid(ps)
        _GRID_KEEPALIVE[ps] = grid
    return grid


def parallel_flip(edges: Iterable[Edge]) -> ParallelFlip:
    """Canonical (sorted, duplicate-free) parallel flip."""
    out = tuple(sorted(set(edge(*e) for e in edges)))
    return out


@dataclass(eq=False)
class Triangulation:
    ps: PointSet
    edges: tuple[Edge, ...]
    edge_set: frozenset[Edge]
    faces: tuple[Face, ...]
    edge_faces: dict[Edge, tuple[Face, ...]] = field(repr=False)
    seg_array: np.ndarray = field(repr=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, Triangulation) and self.edge_set == other.edge_set

    def __hash__(self) -> int:
        return hash(self.edge_set)

    def __contains__(self, e: Edge) -> bool:
        return e in self.edge_set

    @property
    def n(self) -> int:
        return len(self.ps)

    def apexes(self, e: Edge) -> tuple[int, ...]:
        """Third vertices of the faces incident to e (1 for hull edges, else 2)."""
        out = []
        for f in self.edge_faces[e]:
            out.append(next(v for v in f if v not in e))
        return tuple(out)


def _derive_faces(ps: PointSet, grid: Grid, edges: list[Edge]) -> set[Face]:
    adj: dict[int, set[int]] = defaultdict(set)
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    faces: set[Face] = set()
    pts = ps.points
    for u, v in edges:
        for w in adj[u] & adj[v]:
            if orient(pts[u], pts[v], pts[w]) == 0:
                continue
            tri = tuple(sorted((u, v, w)))
            if tri in faces:
                continue
            if triangle_empty(ps, grid, u, v, w):
                faces.add(tri)
    return faces


def from_edges(ps: PointSet, edges: Iterable[Edge], cat: Optional[QuadCatalog] = None) -> Triangulation:
    """Validate an edge set as a triangulation of ps and derive its faces.

    Raises DuplicateEdgeError, CrossingEdgesError, EdgeThroughPointError,
    MissingHullEdgeError or NotMaximalError on structural defects.
    """
    del cat  # validation is catalog-independent
    n = len(ps)
    if n < 3:
        raise ValueError("a triangulation needs at least 3 points")
    norm: list[Edge] = []
    for u, v in edges:
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise TriangulationError(f"invalid edge ({u}, {v})")
        norm.append(edge(u, v))
    if len(set(norm)) != len(norm):
        seen = set()
        dup = next(e for e in norm if e in seen or seen.add(e))
        raise DuplicateEdgeError(f"duplicate edge {dup}")
    norm.sort()
    grid = grid_for(ps)

    from .geometry import segment_empty

    for e in norm:
        if not segment_empty(ps, grid, *e):
            raise EdgeThroughPointError(f"edge {e} passes through a point of the set")
    segs = ps.seg_array(norm)
    ij = kernels.first_crossing(segs)
    if ij != (-1, -1):
        raise CrossingEdgesError(f"edges {norm[ij[0]]} and {norm[ij[1]]} cross")
    missing = [e for e in ps.hull_edges if e not in set(norm)]
    if missing:
        raise MissingHullEdgeError(f"missing hull edge {min(missing)}")
    h = len(ps.hull)
    expected = 3 * n - 3 - h
    if len(norm) != expected:
        raise NotMaximalError(f"{len(norm)} edges, expected {expected} (n={n}, h={h})")

    faces = _derive_faces(ps, grid, norm)
    edge_faces: dict[Edge, list[Face]] = {e: [] for e in norm}
    for f in faces:
        a, b, c = f
        for e in (edge(a, b), edge(a, c), edge(b, c)):
            edge_faces[e].append(f)
    edge_set = frozenset(norm)
    for e, fs in edge_faces.items():
        want = 1 if e in ps.hull_edges else 2
        if len(fs) != want:
            raise NotMaximalError(f"edge {e} borders {len(fs)} faces, expected {want}")
    return Triangulation(
        ps=ps,
        edges=tuple(norm),
        edge_set=edge_set,
        faces=tuple(sorted(faces)),
        edge_faces={e: tuple(sorted(fs)) for e, fs in edge_faces.items()},
        seg_array=segs,
    )


def _quad_of_faces(cat: QuadCatalog, e: Edge, a: int, b: int) -> Optional[Quad]:
    vs = tuple(sorted((e[0], e[1], a, b)))
    for qid in cat.by_diagonal.get(e, ()):
        q = cat.quads[qid]
        if q.vertex_set == vs:
            return q
    return None


def flippable(t: Triangulation, e: Edge, cat: QuadCatalog) -> Optional[Quad]:
    """The convex empty quad flipping e, or None for hull edges and non-convex
    face unions. Raises EdgeNotPresentError when e is not in t."""
    e = edge(*e)
    if e not in t.edge_set:
        raise EdgeNotPresentError(f"edge {e} not present")
    apexes = t.apexes(e)
    if len(apexes) != 2:
        return None
    q = _quad_of_faces(cat, e, *apexes)
    if q is None:
        raise TriangulationError(f"catalog is stale: no quad for {e} with apexes {apexes}")
    return q if q.convex else None


def flip_classification(t: Triangulation, e: Edge, cat: QuadCatalog):
    """('ok', quad) or a violation reason among 'not_present' / 'hull_edge' / 'not_convex'."""
    e = edge(*e)
    if e not in t.edge_set:
        return ("not_present", None)
    apexes = t.apexes(e)
    if len(apexes) != 2:
        return ("hull_edge", None)
    q = _quad_of_faces(cat, e, *apexes)
    if q is None or not q.convex:
        return ("not_convex", None)
    return ("ok", q)


def apply_parallel_flip(t: Triangulation, pf: Iterable[Edge], cat: QuadCatalog) -> Triangulation:
    """Apply a set of simultaneous flips; no two flips may share a face of t."""
    pf = parallel_flip(pf)
    if not pf:
        raise TriangulationError("empty parallel flip")
    used: dict[Face, Edge] = {}
    new_edges = set(t.edge_set)
    for e in pf:
        q = flippable(t, e, cat)
        if q is None:
            raise NotFlippableError(f"edge {e} is not flippable")
        for f in t.edge_faces[e]:
            if f in used:
                raise SharedTriangleError(f"flips {used[f]} and {e} share triangle {f}")
            used[f] = e
        new_edges.remove(e)
        new_edges.add(q.other_diagonal(e))
    return from_edges(t.ps, sorted(new_edges))


def crossing_count(t1: Triangulation, t2: Triangulation) -> int:
    """Number of properly crossing pairs (e1 in t1, e2 in t2)."""
    return int(kernels.count_crossings(t1.seg_array, t2.seg_array))


@dataclass
class SequenceViolation:
    round_index: int
    edges: tuple[Edge, ...]
    reason: str
    detail: str = ""


def validate_sequence(
    t_start: Triangulation,
    seq: Iterable[Iterable[Edge]],
    t_end: Triangulation,
    cat: QuadCatalog,
) -> Optional[SequenceViolation]:
    """None when every round applies under the parallel-flip rules and the
    final edge set equals t_end's; otherwise the first violation."""
    current = t_start
    for r, round_edges in enumerate(seq):
        pf = parallel_flip(round_edges)
        if not pf:
            return SequenceViolation(r, (), "empty_round", "rounds must flip at least one edge")
        quads: dict[Edge, Quad] = {}
        for e in pf:
            verdict, q = flip_classification(current, e, cat)
            if verdict != "ok":
                return SequenceViolation(r, (e,), verdict, f"edge {e} cannot be flipped")
            quads[e] = q
        used: dict[Face, Edge] = {}
        for e in pf:
            for f in current.edge_faces[e]:
                if f in used:
                    return SequenceViolation(
                        r, (used[f], e), "shared_triangle", f"both flips use triangle {f}"
                    )
                used[f] = e
        new_edges = set(current.edge_set)
        for e in pf:
            new_edges.remove(e)
            new_edges.add(quads[e].other_diagonal(e))
        current = from_edges(current.ps, sorted(new_edges))
    if current.edge_set != t_end.edge_set:
        return SequenceViolation(
            -1, (), "wrong_final_state", "sequence does not end at the target triangulation"
        )
    return None


# ---------------------------------------------------------------------------
# Brute-force oracle: breadth-first search over whole triangulations where one
# move is any non-empty set of simultaneously flippable, pairwise independent
# edges. Exact but exponential; intended for point sets with n <= 8.
# ---------------------------------------------------------------------------

FlipOption = tuple[Edge, Edge, Face, Face]  # (edge, replacement, face1, face2)


def _face_edges(f: Face) -> tuple[Edge, Edge, Edge]:
    a, b, c = f
    return (edge(a, b), edge(a, c), edge(b, c))


def flip_options(ps: PointSet, faces: frozenset[Face]) -> list[FlipOption]:
    """All single flips available in the triangulation given by `faces`."""
    by_edge: dict[Edge, list[Face]] = defaultdict(list)
    for f in faces:
        for e in _face_edges(f):
            by_edge[e].append(f)
    pts = ps.points
    out: list[FlipOption] = []
    for e, fs in by_edge.items():
        if len(fs) != 2:
            continue
        f1, f2 = fs
        a = next(v for v in f1 if v not in e)
        b = next(v for v in f2 if v not in e)
        u, v = e
        if orient(pts[a], pts[b], pts[u]) * orient(pts[a], pts[b], pts[v]) < 0:
            out.append((e, edge(a, b), f1, f2))
    out.sort()
    return out


def _apply_options(edges: frozenset[Edge], faces: frozenset[Face], chosen: list[FlipOption]):
    new_edges = set(edges)
    new_faces = set(faces)
    for e, repl, f1, f2 in chosen:
        new_edges.remove(e)
        new_edges.add(repl)
        new_faces.remove(f1)
        new_faces.remove(f2)
        a, b = repl
        u, v = e
        new_faces.add(tuple(sorted((a, b, u))))
        new_faces.add(tuple(sorted((a, b, v))))
    return frozenset(new_edges), frozenset(new_faces)


def _independent_subsets(options: list[FlipOption]):
    """Yield every non-empty subset of pairwise face-disjoint flips."""
    k = len(options)
    conflict = [0] * k
    for i in range(k):
        for j in range(i + 1, k):
            if (options[i][2] in (options[j][2], options[j][3])
                    or options[i][3] in (options[j][2], options[j][3])):
                conflict[i] |= 1 << j
                conflict[j] |= 1 << i
    chosen: list[FlipOption] = []

    def rec(start: int, banned: int):
        for i in range(start, k):
            if banned >> i & 1:
                continue
            chosen.append(options[i])
            yield list(chosen)
            yield from rec(i + 1, banned | conflict[i])
            chosen.pop()

    yield from rec(0, 0)


@dataclass(eq=False)
class StateSpace:
    """All triangulations reachable from a seed, with parallel-move adjacency."""

    ps: PointSet
    states: list[frozenset[Edge]]
    faces: list[frozenset[Face]]
    index: dict[frozenset[Edge], int]
    _parallel_adj: list[Optional[list[int]]] = field(default_factory=list, repr=False)

    def parallel_neighbors(self, i: int) -> list[int]:
        cached = self._parallel_adj[i]
        if cached is not None:
            return cached
        options = flip_options(self.ps, self.faces[i])
        seen: set[int] = set()
        for chosen in _independent_subsets(options):
            new_edges, _ = _apply_options(self.states[i], self.faces[i], chosen)
            seen.add(self.index[new_edges])
        out = sorted(seen)
        self._parallel_adj[i] = out
        return out


def explore_triangulations(t0: Triangulation) -> StateSpace:
    """Enumerate every triangulation of the point set via single-flip BFS."""
    start_edges = t0.edge_set
    start_faces = frozenset(t0.faces)
    states = [start_edges]
    faces = [start_faces]
    index = {start_edges: 0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        opts = flip_options(t0.ps, faces[i])
        for opt in opts:
            new_edges, new_faces = _apply_options(states[i], faces[i], [opt])
            if new_edges not in index:
                index[new_edges] = len(states)
                states.append(new_edges)
                faces.append(new_faces)
                queue.append(len(states) - 1)
    return StateSpace(ps=t0.ps, states=states, faces=faces, index=index,
                      _parallel_adj=[None] * len(states))


def parallel_distance_map(space: StateSpace, source: frozenset[Edge]) -> list[int]:
    """Parallel-flip distance from `source` to every state (-1 if unreachable)."""
    dist = [-1] * len(space.states)
    s = space.index[source]
    dist[s] = 0
    queue = deque([s])
    while queue:
        i = queue.popleft()
        for j in space.parallel_neighbors(i):
            if dist[j] < 0:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def oracle_parallel_distance(
    t1: Triangulation,
    t2: Triangulation,
    cat: Optional[QuadCatalog] = None,
    cap: Optional[int] = None,
) -> Optional[int]:
    """Exact minimal number of parallel flips from t1 to t2 by breadth-first
    search; None when the distance exceeds `cap`. Intended for n <= 8."""
    del cat  # the oracle is deliberately independent of the catalog
    if t1.edge_set == t2.edge_set:
        return 0
    target = t2.edge_set
    dist = {t1.edge_set: 0}
    frontier = [(t1.edge_set, frozenset(t1.faces))]
    depth = 0
    while frontier:
        if cap is not None and depth >= cap:
            return None
        depth += 1
        nxt = []
        for edges, faces in frontier:
            options = flip_options(t1.ps, faces)
            for chosen in _independent_subsets(options):
                new_edges, new_faces = _apply_options(edges, faces, chosen)
                if new_edges == target:
                    return depth
                if new_edges not in dist:
                    dist[new_edges] = depth
                    nxt.append((new_edges, new_faces))
        frontier = nxt
    return None


def sweep_triangulation(ps: PointSet) -> Triangulation:
    """Deterministic lexicographic incremental triangulation (general position)."""
    pts = ps.points
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    if len(order) < 3:
        raise ValueError("need at least 3 points")
    a, b, c = order[0], order[1], order[2]
    if orient(pts[a], pts[b], pts[c]) == 0:
        raise ValueError("sweep triangulation requires the first three points non-collinear")
    if orient(pts[a], pts[b], pts[c]) < 0:
        b, c = c, b
    hull = [a, b, c]  # counter-clockwise
    edges = {edge(a, b), edge(b, c), edge(a, c)}
    for p in order[3:]:
        m = len(hull)
        vis = [
            orient(pts[hull[i]], pts[hull[(i + 1) % m]], pts[p]) < 0
            for i in range(m)
        ]
        if not any(vis):
            raise ValueError("degenerate configuration in sweep triangulation")
        # the visible edges form one contiguous cyclic run; find its start
        s = next(i for i in range(m) if vis[i] and not vis[(i - 1) % m])
        r = 1
        while vis[(s + r) % m]:
            r += 1
        rotated = [hull[(s + k) % m] for k in range(m)]
        for k in range(r + 1):
            edges.add(edge(rotated[k], p))
        hull = [rotated[0], p] + rotated[r:]
    return from_edges(ps, sorted(edges))
