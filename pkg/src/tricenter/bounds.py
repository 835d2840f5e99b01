"""Lower bounds for the exact search: exact pairwise parallel-flip distances,
the triangle-inequality bound on the total, and enumeration of candidate
distance vectors in ascending imbalance order with optional pruning."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

from .encoding import (
    INF,
    MightTable,
    compute_might,
    decode_model,
    encode_cnf,
    encode_xor,
)
from .geometry import Edge, QuadCatalog, edge
from .satbackend import SatResult, SolverConfig, solve
from .triangulation import Triangulation


class SolverUnknownError(RuntimeError):
    """A solve needed for an exact answer returned UNKNOWN."""


def _encode(formulation: str, inputs, cat, d, mights, fixed_center=None):
    if formulation == "xor":
        return encode_xor(inputs, cat, d, mights, fixed_center=fixed_center)
    return encode_cnf(inputs, cat, d, mights, fixed_center=fixed_center)


def pick_formulation(formulation: str, config: SolverConfig) -> str:
    """'auto' resolves to xor for xor-capable external backends, cnf otherwise."""
    if formulation != "auto":
        return formulation
    if config.command is not None and config.with_xor:
        return "xor"
    return "cnf"


def distance_to_fixed_center(
    t: Triangulation,
    center_edges: Sequence[Edge],
    cat: QuadCatalog,
    config: Optional[SolverConfig] = None,
    formulation: str = "cnf",
    mights: Optional[MightTable] = None,
    want_rounds: bool = True,
):
    """Minimal k with the single-input encoding (center hard-fixed) satisfiable.

    Returns (k, rounds). The search starts at the largest `might` bound over
    the center's edges and increments; each UNSAT step is a proof that k-1
    rounds do not suffice.
    """
    config = config or SolverConfig()
    if mights is None:
        mights = compute_might([t], cat)
    center = frozenset(edge(*e) for e in center_edges)
    k = 0
    for e in center:
        b = mights.might(e, 0)
        if b >= INF:
            raise ValueError(f"center edge {e} unreachable; not a triangulation edge?")
        k = max(k, b)
    while True:
        enc = _encode(formulation, [t], cat, (k,), mights, fixed_center=center)
        result = solve(enc.formula, config)
        if result.is_sat:
            if not want_rounds:
                return k, ()
            dec = decode_model(result.model, enc.varmap, [t], (k,), cat,
                               fixed_center=center)
            return k, dec.sequences[0]
        if result.is_unknown:
            raise SolverUnknownError(f"distance probe unknown at k={k}: {result.reason}")
        k += 1


def pairwise_distance(
    t_i: Triangulation,
    t_j: Triangulation,
    cat: QuadCatalog,
    config: Optional[SolverConfig] = None,
    formulation: str = "cnf",
) -> int:
    """Exact parallel flip distance between two triangulations via the encoder."""
    if t_i == t_j:
        return 0
    k, _ = distance_to_fixed_center(
        t_i, t_j.edges, cat, config, formulation, want_rounds=False
    )
    return k


def pairwise_matrix(
    inputs: Sequence[Triangulation],
    cat: QuadCatalog,
    config: Optional[SolverConfig] = None,
    formulation: str = "cnf",
    mights: Optional[MightTable] = None,
) -> list[list[int]]:
    """Symmetric matrix of exact pairwise parallel flip distances."""
    m = len(inputs)
    if mights is None:
        mights = compute_might(inputs, cat)
    D = [[0] * m for _ in range(m)]
    for i in range(m):
        sub_might = MightTable(per_input=[mights.per_input[i]])
        for j in range(i + 1, m):
            if inputs[i] == inputs[j]:
                continue
            k, _ = distance_to_fixed_center(
                inputs[i], inputs[j].edges, cat, config, formulation,
                mights=sub_might, want_rounds=False,
            )
            D[i][j] = D[j][i] = k
    return D


def score(d: Sequence[int]) -> int:
    """Sum of absolute pairwise differences; 0 iff all components equal."""
    total = 0
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            total += abs(d[i] - d[j])
    return total


@dataclass
class SuffixBounds:
    """Exact optimal totals for the last i inputs, for i >= i_start."""

    i_start: int
    values: dict[int, int] = field(default_factory=dict)

    def get(self, size: int) -> Optional[int]:
        return self.values.get(size)


def enumerate_vectors(
    S: int,
    D: Sequence[Sequence[int]],
    suffix: Optional[SuffixBounds] = None,
    prefix_check: Optional[Callable[[tuple[int, ...]], bool]] = None,
    prefix_depths: Sequence[int] = (10, 15),
) -> Iterator[tuple[int, ...]]:
    """All vectors with sum S satisfying d_i + d_j >= D[i][j], each exactly
    once, in ascending score order with lexicographic tie-break.

    Suffix bounds prune branches whose remaining budget cannot cover the
    remaining inputs; prefix_check, when given, may reject a partial
    assignment at the configured depths (used for satisfiability probes).
    """
    m = len(D)
    depths = set(prefix_depths)
    out: list[tuple[int, ...]] = []
    prefix: list[int] = []

    def rec(i: int, remaining: int) -> None:
        if suffix is not None:
            bound = suffix.get(m - i)
            if bound is not None and remaining < bound:
                return
        if i == m:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        # remaining budget must cover every future pair's distance and the
        # per-future-index implied minima (sound, yield-preserving cuts)
        for a in range(i, m):
            for bidx in range(a + 1, m):
                if D[a][bidx] > remaining:
                    return
        future_min = 0
        lo_i = 0
        for l in range(i, m):
            lo = 0
            for j in range(i):
                need = D[j][l] - prefix[j]
                if need > lo:
                    lo = need
            future_min += lo
            if l == i:
                lo_i = lo
        if future_min > remaining:
            return
        for di in range(lo_i, remaining - (future_min - lo_i) + 1):
            prefix.append(di)
            if prefix_check is not None and (i + 1) in depths and (i + 1) < m:
                if not prefix_check(tuple(prefix)):
                    prefix.pop()
                    continue
            rec(i + 1, remaining - di)
            prefix.pop()

    rec(0, S)
    out.sort(key=lambda v: (score(v), v))
    yield from out


def total_lower_bound(D: Sequence[Sequence[int]]) -> int:
    """Smallest S admitting at least one pairwise-feasible distance vector."""
    m = len(D)
    if m <= 1:
        return 0
    S = max(D[i][j] for i in range(m) for j in range(i + 1, m))
    while True:
        if next(enumerate_vectors(S, D), None) is not None:
            return S
        S += 1


def suffix_bounds(
    inputs: Sequence[Triangulation],
    cat: QuadCatalog,
    i_start: int,
    config: Optional[SolverConfig] = None,
    formulation: str = "auto",
) -> SuffixBounds:
    """Exact optimal totals for the trailing sub-instances of size >= i_start,
    computed by the exact solving loop on each suffix."""
    from .pipeline import Instance, exact_solve

    m = len(inputs)
    if m < i_start:
        raise ValueError(f"need at least i_start={i_start} inputs, got {m}")
    bounds = SuffixBounds(i_start=i_start)
    ps = inputs[0].ps
    for size in range(i_start, m + 1):
        sub = Instance(name=f"suffix-{size}", pointset=ps, inputs=list(inputs[m - size:]))
        result = exact_solve(sub, cat=cat, config=config, formulation=formulation)
        bounds.values[size] = result.solution.objective
    return bounds


def make_prefix_check(
    inputs: Sequence[Triangulation],
    cat: QuadCatalog,
    mights: MightTable,
    formulation: str = "cnf",
    max_conflicts: int = 2000,
) -> Callable[[tuple[int, ...]], bool]:
    """Satisfiability probe for vector prefixes: encode the prefix sub-instance
    under a small conflict budget; only a definite UNSAT prunes."""
    from .satbackend import Budget

    probe_config = SolverConfig(budget=Budget(max_conflicts=max_conflicts))

    def check(prefix: tuple[int, ...]) -> bool:
        k = len(prefix)
        sub_mights = MightTable(per_input=mights.per_input[:k])
        enc = _encode(formulation, list(inputs[:k]), cat, prefix, sub_mights)
        result = solve(enc.formula, probe_config)
        return not result.is_unsat

    return check
