"""Flip heuristics for large instances: crossing-reducing parallel transforms
batched by edge coloring, sequence reversal and concatenation, and greedy
center-candidate generation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import kernels
from .geometry import Edge, QuadCatalog, edge
from .triangulation import (
    FlipSequence,
    ParallelFlip,
    Triangulation,
    apply_parallel_flip,
    crossing_count,
    flip_options,
    parallel_flip,
)


class NoImprovingFlipError(RuntimeError):
    """No single flip reduces the crossing count although t != target."""


@dataclass
class ConflictGraph:
    """Faces incident to candidate flip edges; each candidate links its two faces."""

    nodes: list[tuple[int, int, int]]
    links: dict[Edge, tuple[int, int]]

    @classmethod
    def from_candidates(cls, t: Triangulation, candidates: Sequence[Edge]) -> "ConflictGraph":
        nodes: list[tuple[int, int, int]] = []
        node_id: dict[tuple[int, int, int], int] = {}
        links: dict[Edge, tuple[int, int]] = {}
        for e in sorted(candidates):
            fs = t.edge_faces[e]
            ids = []
            for f in fs:
                if f not in node_id:
                    node_id[f] = len(nodes)
                    nodes.append(f)
                ids.append(node_id[f])
            links[e] = (ids[0], ids[1])
        return cls(nodes=nodes, links=links)

    def max_degree(self) -> int:
        deg = [0] * len(self.nodes)
        for a, b in self.links.values():
            deg[a] += 1
            deg[b] += 1
        return max(deg, default=0)


def misra_gries_edge_coloring(graph: ConflictGraph) -> dict[Edge, int]:
    """Proper edge coloring with at most Delta + 1 colors (Misra & Gries).

    Links map to colors 1..Delta+1; faces of a triangulation give Delta <= 3,
    hence at most 4 colors.
    """
    delta = graph.max_degree()
    palette = range(1, delta + 2)
    adj: dict[int, dict[int, Edge]] = {i: {} for i in range(len(graph.nodes))}
    for key, (a, b) in sorted(graph.links.items()):
        adj[a][b] = key
        adj[b][a] = key
    color: dict[Edge, Optional[int]] = {k: None for k in graph.links}

    def used(x: int) -> set[int]:
        return {color[k] for k in adj[x].values() if color[k] is not None}

    def free(x: int) -> int:
        u = used(x)
        return next(c for c in palette if c not in u)

    def is_fan(u: int, fan: list[int]) -> bool:
        for j in range(1, len(fan)):
            cj = color[adj[u][fan[j]]]
            if cj is None or cj in used(fan[j - 1]):
                return False
        return True

    for key in sorted(graph.links):
        if color[key] is not None:
            continue
        a, b = graph.links[key]
        u, v = (a, b) if a <= b else (b, a)
        # maximal fan of u starting at v over already-colored links
        fan = [v]
        in_fan = {v}
        grew = True
        while grew:
            grew = False
            last_used = used(fan[-1])
            for w in sorted(adj[u]):
                if w in in_fan:
                    continue
                cw = color[adj[u][w]]
                if cw is None or cw in last_used:
                    continue
                fan.append(w)
                in_fan.add(w)
                grew = True
                break
        c = free(u)
        d = free(fan[-1])
        if c != d:
            # invert the maximal path from u alternating colors d, c
            path: list[Edge] = []
            x, want, prev = u, d, -1
            while True:
                nxt = None
                for w in sorted(adj[x]):
                    if w != prev and color[adj[x][w]] == want:
                        nxt = w
                        break
                if nxt is None:
                    break
                path.append(adj[x][nxt])
                prev, x = x, nxt
                want = c if want == d else d
            for k in path:
                color[k] = c if color[k] == d else d
        # first fan prefix that is still a fan and whose tip has d free
        w_idx = next(
            i for i in range(len(fan))
            if d not in used(fan[i]) and is_fan(u, fan[: i + 1])
        )
        for j in range(w_idx):
            color[adj[u][fan[j]]] = color[adj[u][fan[j + 1]]]
        color[adj[u][fan[w_idx]]] = d
    return {k: c for k, c in color.items()}


def _reduction(t: Triangulation, e: Edge, repl: Edge, target_segs) -> int:
    pts = t.ps.points
    a, b = pts[e[0]], pts[e[1]]
    c, d = pts[repl[0]], pts[repl[1]]
    before = kernels.count_crossings_one(a.x, a.y, b.x, b.y, target_segs)
    after = kernels.count_crossings_one(c.x, c.y, d.x, d.y, target_segs)
    return before - after


def transform_step(t: Triangulation, target: Triangulation, cat: QuadCatalog) -> ParallelFlip:
    """One parallel flip toward `target`.

    Phase 1 flips a large independent batch of edges whose replacement is a
    target edge (largest color class of the conflict graph plus isolated
    links); phase 2 greedily adds independent flips in non-increasing order of
    crossing-count reduction, positive reductions only.
    """
    if t == target:
        raise ValueError("t already equals target")
    options = flip_options(t.ps, frozenset(t.faces))
    opt_by_edge = {o[0]: o for o in options}
    selected: list[Edge] = []
    used_faces: set[tuple[int, int, int]] = set()

    phase1 = [o for o in options if o[1] in target.edge_set]
    if phase1:
        graph = ConflictGraph.from_candidates(t, [o[0] for o in phase1])
        coloring = misra_gries_edge_coloring(graph)
        classes: dict[int, list[Edge]] = {}
        for k, c in coloring.items():
            classes.setdefault(c, []).append(k)
        best_color = max(sorted(classes), key=lambda c: len(classes[c]))
        chosen = set(classes[best_color])
        degree: dict[int, int] = {}
        for na, nb in graph.links.values():
            degree[na] = degree.get(na, 0) + 1
            degree[nb] = degree.get(nb, 0) + 1
        for k, (na, nb) in graph.links.items():
            if degree[na] == 1 and degree[nb] == 1:
                chosen.add(k)
        for e in sorted(chosen):
            f1, f2 = t.edge_faces[e]
            if f1 in used_faces or f2 in used_faces:
                continue
            selected.append(e)
            used_faces.update((f1, f2))

    ranked = []
    for e, repl, f1, f2 in options:
        if e in opt_by_edge and e not in selected:
            red = _reduction(t, e, repl, target.seg_array)
            if red > 0:
                ranked.append((-red, e, f1, f2))
    ranked.sort()
    for negred, e, f1, f2 in ranked:
        if f1 in used_faces or f2 in used_faces:
            continue
        selected.append(e)
        used_faces.update((f1, f2))

    if not selected:
        raise NoImprovingFlipError(
            f"no crossing-reducing flip exists at distance {crossing_count(t, target)}"
        )
    return parallel_flip(selected)


def _transform_with_trail(
    t: Triangulation, target: Triangulation, cat: QuadCatalog
) -> tuple[FlipSequence, list[Triangulation]]:
    rounds: list[ParallelFlip] = []
    trail = [t]
    guard = crossing_count(t, target) + 1
    current = t
    while current != target:
        if len(rounds) > guard:
            raise NoImprovingFlipError("transform failed to make progress")
        pf = transform_step(current, target, cat)
        current = apply_parallel_flip(current, pf, cat)
        rounds.append(pf)
        trail.append(current)
    return tuple(rounds), trail


def transform(t: Triangulation, target: Triangulation, cat: QuadCatalog) -> FlipSequence:
    """Repeated transform_step until equality; terminates because every round
    strictly reduces the crossing count against the target."""
    seq, _ = _transform_with_trail(t, target, cat)
    return seq


def reverse_sequence(
    seq: Sequence[Sequence[Edge]], t_start: Triangulation, cat: QuadCatalog
) -> FlipSequence:
    """The sequence undoing `seq`: reversed round order, each flip replaced by
    its inverse (the post-flip diagonal flipped back)."""
    current = t_start
    forward: list[list[Edge]] = []
    from .triangulation import flippable

    for round_edges in seq:
        replacements = []
        for e in parallel_flip(round_edges):
            q = flippable(current, e, cat)
            if q is None:
                raise NoImprovingFlipError(f"cannot reverse: {e} not flippable")
            replacements.append(q.other_diagonal(e))
        current = apply_parallel_flip(current, round_edges, cat)
        forward.append(replacements)
    return tuple(parallel_flip(r) for r in reversed(forward))


def best_concatenation(
    t: Triangulation,
    target: Triangulation,
    cat: QuadCatalog,
    budget_active: bool = False,
) -> FlipSequence:
    """Shortest of the concatenations transform(t, tau_k) ++ reversed
    transform(target, tau_k) over intermediate states tau_k of the direct
    transform; all k are tried when budget_active, otherwise only the ends."""
    if t == target:
        return ()
    seq_f, trail = _transform_with_trail(t, target, cat)
    ks = range(len(trail)) if budget_active else (0, len(trail) - 1)
    best: Optional[FlipSequence] = None
    for k in ks:
        tau = trail[k]
        part1 = () if k == 0 else transform(t, tau, cat)
        back = () if tau == target else transform(target, tau, cat)
        part2 = reverse_sequence(back, target, cat) if back else ()
        cand = tuple(part1) + tuple(part2)
        if best is None or len(cand) < len(best):
            best = cand
    return best


@dataclass
class CenterCandidate:
    triangulation: Triangulation
    source_input: int
    greedy_step: int
    total_crossings: int


def _greedy_total_flip(
    t: Triangulation, input_segs: list, cat: QuadCatalog
) -> Optional[ParallelFlip]:
    """Independent set of flips each strictly reducing the total crossing
    count against all inputs, greedily by reduction then edge order."""
    options = flip_options(t.ps, frozenset(t.faces))
    pts = t.ps.points
    ranked = []
    for e, repl, f1, f2 in options:
        a, b = pts[e[0]], pts[e[1]]
        c, d = pts[repl[0]], pts[repl[1]]
        red = 0
        for segs in input_segs:
            red += kernels.count_crossings_one(a.x, a.y, b.x, b.y, segs)
            red -= kernels.count_crossings_one(c.x, c.y, d.x, d.y, segs)
        if red > 0:
            ranked.append((-red, e, f1, f2))
    if not ranked:
        return None
    ranked.sort()
    used: set[tuple[int, int, int]] = set()
    chosen: list[Edge] = []
    for _, e, f1, f2 in ranked:
        if f1 in used or f2 in used:
            continue
        chosen.append(e)
        used.update((f1, f2))
    return parallel_flip(chosen)


def generate_center_candidates(
    inputs: Sequence[Triangulation],
    cat: QuadCatalog,
    limit: int = 32,
) -> list[CenterCandidate]:
    """Greedy crossing-count descent from every input, recording all
    intermediate triangulations, sorted by total crossings against the inputs."""
    input_segs = [t.seg_array for t in inputs]
    seen: set[frozenset[Edge]] = set()
    out: list[CenterCandidate] = []

    def record(t: Triangulation, src: int, step: int) -> None:
        if t.edge_set in seen:
            return
        seen.add(t.edge_set)
        total = sum(crossing_count(t, other) for other in inputs)
        out.append(CenterCandidate(t, src, step, total))

    for i, t in enumerate(inputs):
        record(t, i, 0)
        current = t
        step = 0
        while True:
            pf = _greedy_total_flip(current, input_segs, cat)
            if pf is None:
                break
            current = apply_parallel_flip(current, pf, cat)
            step += 1
            record(current, i, step)
    out.sort(key=lambda c: (c.total_crossings, c.source_input, c.greedy_step))
    return out[:limit]


def heuristic_solve(
    inputs: Sequence[Triangulation],
    cat: QuadCatalog,
    limit: int = 32,
    budget: Optional[int] = None,
):
    """Evaluate center candidates in order and keep the best validating
    solution; the exhaustive concatenation scan runs only for candidates whose
    cheap total lands within current best + m. Returns a pipeline Solution."""
    from .pipeline import Solution

    m = len(inputs)
    candidates = generate_center_candidates(inputs, cat, limit)
    best: Optional[Solution] = None
    evaluated = 0
    for cand in candidates:
        if budget is not None and evaluated >= budget:
            break
        evaluated += 1
        seqs = [best_concatenation(t, cand.triangulation, cat, budget_active=False)
                for t in inputs]
        total = sum(len(s) for s in seqs)
        if best is None or total <= best.objective + m:
            seqs = [best_concatenation(t, cand.triangulation, cat, budget_active=True)
                    for t in inputs]
            total = sum(len(s) for s in seqs)
        if best is None or total < best.objective:
            best = Solution(
                instance_name="",
                center=cand.triangulation.edges,
                sequences=[tuple(s) for s in seqs],
                objective=total,
            )
    assert best is not None, "candidate list always contains the inputs"
    return best
