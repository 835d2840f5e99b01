"""SAT encodings of the central-triangulation problem.

Three formulations are built here: a radius-1 2-SAT check, a multi-round
formulation with XOR transition constraints, and a multi-round plain-CNF
formulation; plus the reachability tables that prune them, the at-most-one
ladder, XOR lowering, DIMACS/XNF emission and model decoding.

Conventions shared by all encoders:
  * constants are folded at emission time, never emitted as variables;
  * hull edges are constant true at every step;
  * the final step of every input shares one set of center variables;
  * variable ids are canonicalised (sorted key order) before returning, so
    emitted files are byte-stable across runs.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from .geometry import Edge, PointSet, QuadCatalog, edge, orient, segment_empty, triangle_empty
from .triangulation import Triangulation, grid_for, parallel_flip, validate_sequence

INF = 1 << 30  # strictly greater than any feasible step count

Lit = Union[bool, int]  # folded constant or signed variable id


class RequiresLoweringError(ValueError):
    """XOR constraints present but the output format cannot express them."""


class DecodedSolutionInvalid(RuntimeError):
    """A model decoded to an invalid solution: an encoder bug by definition."""


@dataclass
class CnfFormula:
    """Integer-literal clauses plus optional parity constraints.

    Parity constraints are canonical: sorted positive variable tuples with a
    0/1 right-hand side meaning xor(vars) == rhs. `infeasible` marks formulas
    whose encoder already derived a contradiction; the conflicting units are
    still present, so solving without looking at the flag stays correct.
    """

    num_vars: int = 0
    clauses: list[list[int]] = field(default_factory=list)
    xors: list[tuple[tuple[int, ...], int]] = field(default_factory=list)
    infeasible: bool = False

    def add_clause(self, lits: Sequence[int]) -> None:
        self.clauses.append(list(lits))

    def add_xor(self, lits: Sequence[int], rhs: int) -> None:
        parity = rhs & 1
        count: dict[int, int] = {}
        for lit in lits:
            v = abs(lit)
            if lit < 0:
                parity ^= 1
            count[v] = count.get(v, 0) ^ 1
        vars_ = tuple(sorted(v for v, odd in count.items() if odd))
        if not vars_:
            if parity:
                self.infeasible = True
                self.clauses.append([])  # recorded; emitters must not see this
            return
        self.xors.append((vars_, parity))

    def copy(self) -> "CnfFormula":
        return CnfFormula(
            num_vars=self.num_vars,
            clauses=[list(c) for c in self.clauses],
            xors=list(self.xors),
            infeasible=self.infeasible,
        )


@dataclass
class VarMap:
    """Bijection between semantic keys and DIMACS variable ids (1-based)."""

    ids: dict[tuple, int]
    keys: list[tuple]

    def id_of(self, key: tuple) -> int:
        return self.ids[key]

    def key_of(self, vid: int) -> tuple:
        return self.keys[vid - 1]

    def __contains__(self, key: tuple) -> bool:
        return key in self.ids

    def __len__(self) -> int:
        return len(self.keys)


class _Builder:
    """Accumulates clauses with constant folding, then freezes to canonical ids."""

    def __init__(self) -> None:
        self.ids: dict[tuple, int] = {}
        self.keys: list[tuple] = []
        self.clauses: list[list[int]] = []
        self.xor_items: list[tuple[list[int], int]] = []
        self.pins: dict[int, bool] = {}
        self.infeasible = False
        self._aux = 0

    def var(self, key: tuple) -> int:
        vid = self.ids.get(key)
        if vid is None:
            vid = len(self.keys) + 1
            self.ids[key] = vid
            self.keys.append(key)
        return vid

    def lit(self, key: tuple, sign: bool = True) -> int:
        v = self.var(key)
        return v if sign else -v

    def fresh_aux(self, tag: str) -> int:
        self._aux += 1
        return self.var(("aux", tag, self._aux))

    def emit(self, lits: Iterable[Lit]) -> None:
        out: list[int] = []
        for lit in lits:
            if lit is True:
                return
            if lit is False:
                continue
            out.append(lit)
        if not out:
            self.infeasible = True
            return
        self.clauses.append(out)

    def emit_xor(self, lits: Iterable[Lit], rhs: int) -> None:
        out: list[int] = []
        parity = rhs & 1
        for lit in lits:
            if lit is True:
                parity ^= 1
            elif lit is False:
                continue
            else:
                out.append(lit)
        if not out:
            if parity:
                self.infeasible = True
            return
        self.xor_items.append((out, parity))

    def pin(self, lit: Lit, value: bool) -> None:
        if lit is True or lit is False:
            if bool(lit) != value:
                self.infeasible = True
            return
        v, want = (abs(lit), value if lit > 0 else not value)
        if v in self.pins:
            if self.pins[v] != want:
                self.infeasible = True
                self.clauses.append([v if want else -v])
            return
        self.pins[v] = want
        self.clauses.append([v if want else -v])

    def freeze(self) -> tuple[CnfFormula, VarMap]:
        order = sorted(range(len(self.keys)), key=lambda k: self.keys[k])
        remap = [0] * (len(self.keys) + 1)
        keys_sorted: list[tuple] = []
        for new_id, old_index in enumerate(order, start=1):
            remap[old_index + 1] = new_id
            keys_sorted.append(self.keys[old_index])
        formula = CnfFormula(num_vars=len(keys_sorted), infeasible=self.infeasible)
        for cl in self.clauses:
            formula.add_clause(
                [remap[l] if l > 0 else -remap[-l] for l in cl]
            )
        for lits, parity in self.xor_items:
            formula.add_xor([remap[l] if l > 0 else -remap[-l] for l in lits], parity)
        varmap = VarMap(ids={k: i + 1 for i, k in enumerate(keys_sorted)}, keys=keys_sorted)
        return formula, varmap


@dataclass
class EncodeResult:
    formula: CnfFormula
    varmap: VarMap

    @property
    def infeasible(self) -> bool:
        return self.formula.infeasible


def neg(lit: Lit) -> Lit:
    if lit is True:
        return False
    if lit is False:
        return True
    return -lit


# ---------------------------------------------------------------------------
# At-most-one ladder and XOR lowering
# ---------------------------------------------------------------------------

def amo_ladder(var_ids: Sequence[int], fresh: Callable[[], int]) -> list[list[int]]:
    """At-most-one over `var_ids` with r-1 fresh rail variables and 3r-2 clauses.

    Rail s_i means "one of x_1..x_i is already chosen"; models project exactly
    onto the assignments with at most one input true. r=1 needs no clauses.
    """
    r = len(var_ids)
    if r <= 1:
        return []
    x = list(var_ids)
    s = [fresh() for _ in range(r - 1)]
    clauses: list[list[int]] = []
    for i in range(r - 1):
        clauses.append([-x[i], s[i]])
    for i in range(r - 2):
        clauses.append([-s[i], s[i + 1]])
    for i in range(r - 1):
        clauses.append([-s[i], -x[i + 1]])
    clauses.append([-s[0], x[0]])
    if r == 2:
        clauses.append([-x[0], -x[1]])
    else:
        clauses.append([-s[r - 2], x[r - 2], s[r - 3]])
    return clauses


def _xor3_clauses(a: int, b: int, c: int, rhs: int) -> list[list[int]]:
    # the clause [sa*a, sb*b, sc*c] excludes exactly the assignment where each
    # literal is false, i.e. var true iff its sign is negative
    out = []
    for sa in (1, -1):
        for sb in (1, -1):
            for sc in (1, -1):
                trues = (sa < 0) + (sb < 0) + (sc < 0)
                if trues % 2 != rhs:
                    out.append([sa * a, sb * b, sc * c])
    return out


def xor_to_cnf(formula: CnfFormula) -> CnfFormula:
    """Lower parity constraints to CNF with a chain of fresh parity variables.

    Width 1 becomes a unit, width 2 two clauses, width 3 four clauses; wider
    constraints are chained through fresh variables three literals at a time.
    Solutions project identically onto the original variables.
    """
    out = CnfFormula(
        num_vars=formula.num_vars,
        clauses=[list(c) for c in formula.clauses],
        infeasible=formula.infeasible,
    )
    for vars_, rhs in formula.xors:
        lits = list(vars_)
        while len(lits) > 3:
            t = out.num_vars + 1
            out.num_vars = t
            a, b = lits[0], lits[1]
            out.clauses.extend(_xor3_clauses(a, b, t, 0))
            lits = [t] + lits[2:]
        if len(lits) == 1:
            out.clauses.append([lits[0] if rhs else -lits[0]])
        elif len(lits) == 2:
            a, b = lits
            if rhs:
                out.clauses.extend([[a, b], [-a, -b]])
            else:
                out.clauses.extend([[-a, b], [a, -b]])
        else:
            out.clauses.extend(_xor3_clauses(lits[0], lits[1], lits[2], rhs))
    return out


# ---------------------------------------------------------------------------
# DIMACS / XNF emission and parsing
# ---------------------------------------------------------------------------

def emit_dimacs(formula: CnfFormula, with_xor: bool = False) -> str:
    """Standard DIMACS CNF; parity constraints become "x"-prefixed lines whose
    listed literals XOR to true (CryptoMiniSat convention)."""
    if formula.xors and not with_xor:
        raise RequiresLoweringError("formula has parity constraints; lower with xor_to_cnf first")
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses) + len(formula.xors)}"]
    for cl in formula.clauses:
        lines.append(" ".join(str(l) for l in cl) + " 0")
    for vars_, rhs in formula.xors:
        lits = list(vars_)
        if not rhs:
            lits[0] = -lits[0]
        lines.append("x " + " ".join(str(l) for l in lits) + " 0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    formula = CnfFormula()
    declared = 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            declared = int(parts[2])
            continue
        if line.startswith("x"):
            lits = [int(tok) for tok in line[1:].split()]
            if lits and lits[-1] == 0:
                lits.pop()
            formula.add_xor(lits, 1)
            continue
        lits = [int(tok) for tok in line.split()]
        if lits and lits[-1] == 0:
            lits.pop()
        formula.add_clause(lits)
    used = max(
        [abs(l) for cl in formula.clauses for l in cl]
        + [v for vars_, _ in formula.xors for v in vars_]
        + [0]
    )
    formula.num_vars = max(declared, used)
    return formula


# ---------------------------------------------------------------------------
# Reachability tables
# ---------------------------------------------------------------------------

@dataclass
class MightTable:
    """Lower bounds on the first round at which each edge can appear.

    per_input[i] maps an edge to its bound starting from T_i; edges of T_i
    map to 0, unreachable edges are absent (treated as INF).
    """

    per_input: list[dict[Edge, int]]

    def might(self, e: Edge, i: int) -> int:
        return self.per_input[i].get(e, INF)

    def center_candidates(self, potential: Iterable[Edge], d: Sequence[int]) -> set[Edge]:
        """Edges that might be in the center: reachable within d_i from every input."""
        return {
            e for e in potential
            if all(self.might(e, i) <= d[i] for i in range(len(self.per_input)))
        }


def compute_might(inputs: Sequence[Triangulation], cat: QuadCatalog) -> MightTable:
    """Iterative relaxation: a convex quad's dual diagonal is reachable one
    round after its four boundary edges and one diagonal all are."""
    convex = [q for q in cat.quads if q.convex]
    per_input = []
    for t in inputs:
        dist: dict[Edge, int] = {e: 0 for e in t.edges}
        s = 0
        while True:
            added = False
            for q in convex:
                if any(dist.get(b, INF) > s for b in q.boundary):
                    continue
                d1, d2 = q.diagonals
                if dist.get(d1, INF) <= s and dist.get(d2, INF) > s + 1:
                    dist[d2] = s + 1
                    added = True
                if dist.get(d2, INF) <= s and dist.get(d1, INF) > s + 1:
                    dist[d1] = s + 1
                    added = True
            if not added:
                break
            s += 1
        per_input.append(dist)
    return MightTable(per_input=per_input)


def compute_min_distance_from_center(
    mights: MightTable,
    d: Sequence[int],
    cat: QuadCatalog,
    potential: Iterable[Edge],
    seeds: Optional[set[Edge]] = None,
) -> dict[Edge, int]:
    """Per-edge lower bound on rounds needed to reach an edge that might be in
    the center; center-candidate edges start at 0, the rest relax upward for
    max(d) rounds through convex quads."""
    if seeds is None:
        seeds = mights.center_candidates(potential, d)
    mdfc: dict[Edge, int] = {e: 0 for e in seeds}
    convex = [q for q in cat.quads if q.convex]
    for s in range(max(d, default=0)):
        for q in convex:
            if any(mdfc.get(b, INF) > s for b in q.boundary):
                continue
            d1, d2 = q.diagonals
            if mdfc.get(d1, INF) <= s and mdfc.get(d2, INF) > s + 1:
                mdfc[d2] = s + 1
            if mdfc.get(d2, INF) <= s and mdfc.get(d1, INF) > s + 1:
                mdfc[d1] = s + 1
    return mdfc


# ---------------------------------------------------------------------------
# Static per-point-set structures shared by the encoders
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class _Static:
    potential: list[Edge]
    potential_set: frozenset[Edge]
    crossing: list[tuple[Edge, Edge]]
    # (e, e', connector) for edges sharing a vertex whose joint triangle is empty
    vertex_pairs: list[tuple[Edge, Edge, Edge]]


_STATIC: "weakref.WeakKeyDictionary[PointSet, _Static]" = weakref.WeakKeyDictionary()


def _static_for(ps: PointSet) -> _Static:
    cached = _STATIC.get(ps)
    if cached is not None:
        return cached
    from .geometry import crossing_pairs, empty_segments

    grid = grid_for(ps)
    potential = empty_segments(ps, grid)
    potential_set = frozenset(potential)
    crossing = crossing_pairs(ps, potential)
    pts = ps.points
    vertex_pairs: list[tuple[Edge, Edge, Edge]] = []
    for i, e in enumerate(potential):
        for f in potential[i + 1:]:
            shared = set(e) & set(f)
            if len(shared) != 1:
                continue
            u = shared.pop()
            v = e[0] if e[1] == u else e[1]
            y = f[0] if f[1] == u else f[1]
            conn = edge(v, y)
            if conn not in potential_set:
                continue
            if orient(pts[u], pts[v], pts[y]) == 0:
                continue
            if not triangle_empty(ps, grid, u, v, y):
                continue
            vertex_pairs.append((e, f, conn))
    static = _Static(
        potential=potential,
        potential_set=potential_set,
        crossing=crossing,
        vertex_pairs=vertex_pairs,
    )
    _STATIC[ps] = static
    return static


def _face_quad(t: Triangulation, cat: QuadCatalog, e: Edge):
    """Catalog quad formed by the two faces incident to internal edge e."""
    apexes = t.apexes(e)
    if len(apexes) != 2:
        return None
    vs = tuple(sorted((e[0], e[1]) + apexes))
    for qid in cat.by_diagonal.get(e, ()):
        if cat.quads[qid].vertex_set == vs:
            return cat.quads[qid]
    return None


# ---------------------------------------------------------------------------
# Radius-1 2-SAT formulation
# ---------------------------------------------------------------------------

def encode_radius1(inputs: Sequence[Triangulation], cat: QuadCatalog) -> EncodeResult:
    """Satisfiable iff some center is within one parallel flip of every input.

    One variable per convex quad realised as a face pair in any input, with
    the recorded (lexicographically smaller) diagonal as reference; pairs of
    quads sharing a face of the same input exclude each other, and per-edge
    presence expressions are chained to agree across inputs.
    """
    b = _Builder()
    ps = inputs[0].ps
    hull = ps.hull_edges

    def qlit(q, sign: bool) -> int:
        # convex quads are unique per 4-subset, so the vertex set is the key
        return b.lit(("q",) + q.vertex_set, sign)

    exprs: list[dict[Edge, Lit]] = []
    for t in inputs:
        expr: dict[Edge, Lit] = {}
        flip_lits: dict[Edge, int] = {}
        for e in t.edges:
            if e in hull:
                continue
            q = _face_quad(t, cat, e)
            if q is None:
                raise ValueError("catalog is stale for this point set")
            if not q.convex:
                expr[e] = True
                continue
            ref = q.diagonals[0]
            other = q.other_diagonal(e)
            expr[e] = qlit(q, e == ref)
            expr[other] = qlit(q, other == ref)
            flip_lits[e] = qlit(q, e != ref)  # true iff the quad is flipped
        # independence: flips sharing a face of t are mutually exclusive
        face_edges: dict[tuple, list[Edge]] = {}
        for e in flip_lits:
            for f in t.edge_faces[e]:
                face_edges.setdefault(f, []).append(e)
        for f in sorted(face_edges):
            group = sorted(face_edges[f])
            for i, e1 in enumerate(group):
                for e2 in group[i + 1:]:
                    b.emit([neg(flip_lits[e1]), neg(flip_lits[e2])])
        exprs.append(expr)

    # cross-input agreement on every edge with at least one expression
    union = sorted(set().union(*[set(x) for x in exprs])) if exprs else []
    for e in union:
        vals = [x.get(e, False) for x in exprs]
        first = vals[0]
        for other in vals[1:]:
            if first is True:
                b.emit([other])
            elif first is False:
                b.emit([neg(other)])
            elif other is True:
                b.emit([first])
            elif other is False:
                b.emit([neg(first)])
            else:
                b.emit([neg(first), other])
                b.emit([first, neg(other)])
    formula, varmap = b.freeze()
    return EncodeResult(formula=formula, varmap=varmap)


def decode_radius1_center(model: Sequence[bool], varmap: VarMap,
                          inputs: Sequence[Triangulation], cat: QuadCatalog) -> tuple[Edge, ...]:
    """Center edge set selected by a radius-1 model."""
    ps = inputs[0].ps
    center: set[Edge] = set(ps.hull_edges)
    for t in inputs:
        for e in t.edges:
            if e in ps.hull_edges or e in center:
                continue
            q = _face_quad(t, cat, e)
            if not q.convex:
                center.add(e)
                continue
            key = ("q",) + q.vertex_set
            ref = q.diagonals[0]
            use_ref = model[varmap.id_of(key)]
            center.add(ref if use_ref else q.other_diagonal(ref))
    return tuple(sorted(center))


# ---------------------------------------------------------------------------
# Multi-round encoders
# ---------------------------------------------------------------------------

def _center_setup(
    b: _Builder,
    inputs: Sequence[Triangulation],
    d: Sequence[int],
    mights: MightTable,
    static: _Static,
    fixed_center: Optional[frozenset[Edge]],
    center_key: Callable[[Edge], tuple],
):
    """Shared final-step plumbing: candidate set plus the center literal maker."""
    ps = inputs[0].ps
    hull = ps.hull_edges
    candidates = {
        e for e in mights.center_candidates(static.potential, d) if e not in hull
    }
    if fixed_center is not None:
        fixed = frozenset(edge(*e) for e in fixed_center)
        for e in sorted(fixed - hull):
            if e not in candidates:
                b.infeasible = True
        candidates &= fixed

        def center_lit(e: Edge) -> Lit:
            return e in fixed
    else:

        def center_lit(e: Edge) -> Lit:
            if e not in candidates:
                return False
            return b.lit(center_key(e))

    return candidates, center_lit


def encode_cnf(
    inputs: Sequence[Triangulation],
    cat: QuadCatalog,
    d: Sequence[int],
    mights: MightTable,
    mdfc: Optional[dict[Edge, int]] = None,
    fixed_center: Optional[Iterable[Edge]] = None,
) -> EncodeResult:
    """Plain-CNF multi-round formulation.

    Presence variables p(i, s, e) live on steps 1..d_i (step 0 is folded as
    constants, the final step is shared across inputs through input 0's
    variables), flip variables f(i, s, e) on steps 0..d_i-1. Clause families:
    crossing exclusions over a pruned step window, the step-0 flip triple,
    persistence, flip-needs-presence, quad transition and cannot-flip clauses,
    vertex-sharing flip exclusions (emitted only when the shared triangle is
    empty, which makes them exactly the shared-face rule), and distance-to-
    center pruning units.
    """
    ps = inputs[0].ps
    m = len(inputs)
    if len(d) != m:
        raise ValueError("distance vector length mismatch")
    static = _static_for(ps)
    hull = ps.hull_edges
    if mdfc is None:
        mdfc = compute_min_distance_from_center(mights, d, cat, static.potential)
    b = _Builder()
    d0 = d[0]
    fixed = frozenset(edge(*e) for e in fixed_center) if fixed_center is not None else None
    candidates, center_lit = _center_setup(
        b, inputs, d, mights, static, fixed, lambda e: ("p", 0, d0, e)
    )

    def pvar(i: int, s: int, e: Edge) -> Lit:
        if e in hull:
            return True
        if s == d[i]:
            if fixed is None and d0 == 0:
                ok = e in inputs[0].edge_set
                if ok and e not in candidates:
                    b.infeasible = True
                return ok and e in candidates
            return center_lit(e)
        if s == 0:
            return e in inputs[i].edge_set
        if mights.might(e, i) > s:
            return False
        return b.lit(("p", i, s, e))

    convex = [(qid, q) for qid, q in enumerate(cat.quads) if q.convex]
    nonconvex = [(qid, q) for qid, q in enumerate(cat.quads) if not q.convex]

    # minimal step from which each edge has some convex quad fully available
    quad_ready: list[dict[Edge, int]] = []
    for i in range(m):
        ready: dict[Edge, int] = {}
        for _, q in convex:
            thr = max(mights.might(bd, i) for bd in q.boundary)
            for dg in q.diagonals:
                if thr < ready.get(dg, INF):
                    ready[dg] = thr
        quad_ready.append(ready)

    def can_flip(i: int, s: int, e: Edge) -> bool:
        if e in hull:
            return False
        if s == 0:
            if e not in inputs[i].edge_set:
                return False
            q = _face_quad(inputs[i], cat, e)
            return q is not None and q.convex
        return mights.might(e, i) <= s and quad_ready[i].get(e, INF) <= s

    def fvar(i: int, s: int, e: Edge) -> int:
        return b.lit(("f", i, s, e))

    for i in range(m):
        di = d[i]
        t = inputs[i]
        if di == 0:
            for e in static.potential:
                if e in hull:
                    continue
                b.pin(pvar(i, di, e), e in t.edge_set)
            continue

        # step 0
        flippable0 = sorted(e for e in t.edges if can_flip(i, 0, e))
        for e in sorted(t.edges):
            if e in hull:
                continue
            if e in flippable0:
                q = _face_quad(t, cat, e)
                other = q.other_diagonal(e)
                f0 = fvar(i, 0, e)
                b.emit([f0, pvar(i, 1, e)])
                b.emit([-f0, pvar(i, 1, other)])
                b.emit([neg(pvar(i, 1, e)), neg(pvar(i, 1, other))])
            else:
                b.emit([pvar(i, 1, e)])
        face_groups: dict[tuple, list[Edge]] = {}
        for e in flippable0:
            for f in t.edge_faces[e]:
                face_groups.setdefault(f, []).append(e)
        for f in sorted(face_groups):
            group = face_groups[f]
            for a_i, e1 in enumerate(group):
                for e2 in group[a_i + 1:]:
                    b.emit([-fvar(i, 0, e1), -fvar(i, 0, e2)])

        # steps 1 .. d_i - 1
        for s in range(1, di):
            for e in static.potential:
                if e in hull or mights.might(e, i) > s:
                    continue
                pe = pvar(i, s, e)
                if can_flip(i, s, e):
                    b.emit([neg(pe), fvar(i, s, e), pvar(i, s + 1, e)])
                    b.emit([pe, -fvar(i, s, e)])
                else:
                    b.emit([neg(pe), pvar(i, s + 1, e)])
                if mdfc.get(e, INF) > di - s:
                    b.emit([neg(pe)])
            for qid, q in convex:
                if any(mights.might(bd, i) > s for bd in q.boundary):
                    continue
                bnd = [neg(pvar(i, s, bd)) for bd in q.boundary]
                for dg in q.diagonals:
                    other = q.other_diagonal(dg)
                    if mights.might(dg, i) > s or not can_flip(i, s, dg):
                        continue
                    if mdfc.get(other, INF) >= di - s:
                        b.emit(bnd + [-fvar(i, s, dg)])
                    else:
                        b.emit(bnd + [neg(pvar(i, s, dg)), -fvar(i, s, dg),
                                      pvar(i, s + 1, other)])
            for qid, q in nonconvex:
                dg = q.diagonals[0]
                if any(mights.might(bd, i) > s for bd in q.boundary):
                    continue
                if mights.might(dg, i) > s or not can_flip(i, s, dg):
                    continue
                b.emit([neg(pvar(i, s, bd)) for bd in q.boundary] + [-fvar(i, s, dg)])
            for e1, e2, conn in static.vertex_pairs:
                if not (can_flip(i, s, e1) and can_flip(i, s, e2)):
                    continue
                if mights.might(conn, i) > s:
                    continue
                b.emit([neg(pvar(i, s, conn)), -fvar(i, s, e1), -fvar(i, s, e2)])

        # crossing exclusions across the pruned window
        max_s = di if i == 0 else di - 1
        for e1, e2 in static.crossing:
            lo = max(mights.might(e1, i), mights.might(e2, i), 1)
            hi = min(max_s, di - max(mdfc.get(e1, INF), mdfc.get(e2, INF)))
            for s in range(lo, hi + 1):
                b.emit([neg(pvar(i, s, e1)), neg(pvar(i, s, e2))])

    formula, varmap = b.freeze()
    return EncodeResult(formula=formula, varmap=varmap)


def encode_xor(
    inputs: Sequence[Triangulation],
    cat: QuadCatalog,
    d: Sequence[int],
    mights: MightTable,
    fixed_center: Optional[Iterable[Edge]] = None,
) -> EncodeResult:
    """Multi-round formulation with XOR edge-transition constraints.

    Per input i and round t in 1..d_i: flip preconditions require the quad's
    boundary at t-1; each edge's state toggles exactly with the parity of the
    flips on its quads; an at-most-one ladder per vertex triple keeps
    simultaneous flips face-disjoint; initial states are constants, hull edges
    constant true, and the final step binds to the shared center variables.
    """
    ps = inputs[0].ps
    m = len(inputs)
    if len(d) != m:
        raise ValueError("distance vector length mismatch")
    static = _static_for(ps)
    hull = ps.hull_edges
    b = _Builder()
    fixed = frozenset(edge(*e) for e in fixed_center) if fixed_center is not None else None
    candidates, center_lit = _center_setup(
        b, inputs, d, mights, static, fixed, lambda e: ("c", e)
    )

    def evar(i: int, t: int, e: Edge) -> Lit:
        if e in hull:
            return True
        if t == d[i]:
            return center_lit(e)
        if t == 0:
            return e in inputs[i].edge_set
        if mights.might(e, i) > t:
            return False
        return b.lit(("e", i, t, e))

    convex = [(qid, q) for qid, q in enumerate(cat.quads) if q.convex]

    def f_exists(i: int, t: int, q) -> bool:
        if any(mights.might(bd, i) > t - 1 for bd in q.boundary):
            return False
        return min(mights.might(q.diagonals[0], i), mights.might(q.diagonals[1], i)) <= t - 1

    for i in range(m):
        di = d[i]
        if di == 0:
            for e in static.potential:
                if e in hull:
                    continue
                b.pin(evar(i, di, e), e in inputs[i].edge_set)
            continue
        for t in range(1, di + 1):
            fired: dict[int, int] = {}
            for qid, q in convex:
                if not f_exists(i, t, q):
                    continue
                fv = b.lit(("fq", i, t, qid))
                fired[qid] = fv
                for bd in q.boundary:
                    b.emit([-fv, evar(i, t - 1, bd)])
            for e in static.potential:
                if e in hull:
                    continue
                flips = [fired[qid] for qid in cat.convex_by_diagonal.get(e, ())
                         if qid in fired]
                b.emit_xor([evar(i, t - 1, e), evar(i, t, e)] + flips, 0)
            for triple in sorted(cat.convex_by_triple):
                group = [fired[qid] for qid in cat.convex_by_triple[triple] if qid in fired]
                if len(group) >= 2:
                    for cl in amo_ladder(group, lambda: b.fresh_aux("amo")):
                        b.emit(cl)

    formula, varmap = b.freeze()
    return EncodeResult(formula=formula, varmap=varmap)


# ---------------------------------------------------------------------------
# Model decoding
# ---------------------------------------------------------------------------

@dataclass
class DecodedSolution:
    center: tuple[Edge, ...]
    sequences: list[tuple[tuple[Edge, ...], ...]]  # per input, per round, flipped edges


def decode_model(
    model: Sequence[bool],
    varmap: VarMap,
    inputs: Sequence[Triangulation],
    d: Sequence[int],
    cat: QuadCatalog,
    fixed_center: Optional[Iterable[Edge]] = None,
) -> DecodedSolution:
    """Decode a satisfying model into a center and per-input parallel flip
    sequences (pre-flip diagonals, empty rounds dropped), then validate every
    sequence; an invalid decode raises DecodedSolutionInvalid."""
    ps = inputs[0].ps
    hull = ps.hull_edges
    static = _static_for(ps)

    if fixed_center is not None:
        center = frozenset(edge(*e) for e in fixed_center)
    else:
        center_edges = set(hull)
        d0 = d[0]
        if d0 == 0:
            center_edges |= set(inputs[0].edges)
        else:
            for e in static.potential:
                for key in (("p", 0, d0, e), ("c", e)):
                    if key in varmap and model[varmap.id_of(key)]:
                        center_edges.add(e)
        center = frozenset(center_edges)

    is_xor = any(k[0] == "fq" for k in varmap.keys)
    sequences: list[tuple[tuple[Edge, ...], ...]] = []
    for i, t in enumerate(inputs):
        rounds: list[tuple[Edge, ...]] = []
        current = set(t.edge_set)
        for s in range(d[i]):
            step = s + 1 if is_xor else s
            flips: list[Edge] = []
            if is_xor:
                for qid, q in enumerate(cat.quads):
                    key = ("fq", i, step, qid)
                    if key in varmap and model[varmap.id_of(key)]:
                        d1, d2 = q.diagonals
                        present = [dg for dg in (d1, d2) if dg in current]
                        if len(present) != 1:
                            raise DecodedSolutionInvalid(
                                f"fired quad {q.verts} has {len(present)} present diagonals"
                            )
                        flips.append(present[0])
            else:
                for e in static.potential:
                    key = ("f", i, step, e)
                    if key in varmap and model[varmap.id_of(key)]:
                        flips.append(e)
            if not flips:
                continue
            pf = parallel_flip(flips)
            rounds.append(pf)
            for e in pf:
                qs = [cat.quads[qid] for qid in cat.convex_by_diagonal.get(e, ())]
                q = next(
                    (q for q in qs
                     if all(bd in current for bd in q.boundary) and e in current),
                    None,
                )
                if q is None:
                    raise DecodedSolutionInvalid(f"flip of {e} has no available quad")
                current.discard(e)
                current.add(q.other_diagonal(e))
        if current != center:
            raise DecodedSolutionInvalid(
                f"input {i}: decoded sequence ends away from the center"
            )
        sequences.append(tuple(rounds))

    from .triangulation import from_edges

    center_t = from_edges(ps, sorted(center))
    for i, t in enumerate(inputs):
        violation = validate_sequence(t, sequences[i], center_t, cat)
        if violation is not None:
            raise DecodedSolutionInvalid(f"input {i}: {violation}")
    return DecodedSolution(center=tuple(sorted(center)), sequences=sequences)
