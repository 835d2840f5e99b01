"""SAT solving backends.

`solve_internal` is a complete conflict-driven solver (two-watched-literal
propagation, first-UIP learning, activity-based branching, Luby restarts,
phase saving) for desk-scale formulas; `solve_external` drives any solver
speaking the DIMACS convention (`<command> <cnf-path>`, "s ..."/"v ..."
output, exit codes 10/20). External models are always re-verified before
being trusted. Both are deterministic for a fixed budget and seed.
"""

from __future__ import annotations

import hashlib
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from heapq import heappush, heappop
from typing import Optional, Sequence

from .encoding import CnfFormula, emit_dimacs, xor_to_cnf

CACHE_DIR_ENV = "TRICENTER_CACHE_DIR"


class MalformedFormulaError(ValueError):
    pass


class ModelVerificationError(RuntimeError):
    """An external solver returned a model that does not satisfy the formula."""


@dataclass
class SatResult:
    status: str  # "sat" | "unsat" | "unknown"
    model: Optional[list[bool]] = None  # 1-indexed; model[0] unused
    reason: str = ""

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.status == "unsat"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"


@dataclass
class Budget:
    max_conflicts: Optional[int] = None
    max_seconds: Optional[float] = None


@dataclass
class SolverConfig:
    """How `solve` should decide satisfiability."""

    command: Optional[str] = None  # external solver command; None = internal
    with_xor: bool = False  # external solver accepts "x" parity lines
    budget: Budget = field(default_factory=Budget)
    seed: int = 0
    timeout: Optional[float] = None  # external wall-clock limit
    keep_files: bool = False  # retain DIMACS files under the cache dir


def verify_model(formula: CnfFormula, model: Sequence[bool]) -> bool:
    """True iff every clause has a true literal and every parity constraint holds."""
    for cl in formula.clauses:
        if not cl:
            return False
        if not any(model[l] if l > 0 else not model[-l] for l in cl):
            return False
    for vars_, rhs in formula.xors:
        if sum(1 for v in vars_ if model[v]) % 2 != rhs:
            return False
    return True


class _Luby:
    def __init__(self, unit: int):
        self.unit = unit

    def limit(self, i: int) -> int:
        # Luby sequence 1 1 2 1 1 2 4 ... ; i is 0-based
        i += 1
        while True:
            k = i.bit_length()
            if i == (1 << k) - 1:
                return self.unit * (1 << (k - 1))
            i = i - (1 << (k - 1)) + 1


class _Cdcl:
    def __init__(self, num_vars: int, clauses: list[list[int]]):
        self.nv = num_vars
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign = [0] * (num_vars + 1)  # 0 free, 1 true, -1 false
        self.level = [0] * (num_vars + 1)
        self.reason = [-1] * (num_vars + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity = [0.0] * (num_vars + 1)
        self.var_inc = 1.0
        self.heap: list[tuple[float, int]] = []
        self.polarity = [False] * (num_vars + 1)
        self.ok = True
        for v in range(1, num_vars + 1):
            heappush(self.heap, (0.0, v))
        for cl in clauses:
            self._add_clause(cl)

    def _value(self, lit: int) -> int:
        a = self.assign[abs(lit)]
        return a if lit > 0 else -a

    def _watch(self, lit: int, ci: int) -> None:
        self.watches.setdefault(lit, []).append(ci)

    def _enqueue(self, lit: int, reason: int) -> bool:
        val = self._value(lit)
        if val == 1:
            return True
        if val == -1:
            return False
        v = abs(lit)
        self.assign[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)
        return True

    def _add_clause(self, lits: Sequence[int]) -> None:
        if not self.ok:
            return
        seen = set()
        cl: list[int] = []
        for l in lits:
            if l == 0 or abs(l) > self.nv:
                raise MalformedFormulaError(f"literal {l} out of range")
            if -l in seen:
                return  # tautology
            if l not in seen:
                seen.add(l)
                cl.append(l)
        if not cl:
            self.ok = False
            return
        if len(cl) == 1:
            if not self._enqueue(cl[0], -1):
                self.ok = False
            return
        ci = len(self.clauses)
        self.clauses.append(cl)
        self._watch(cl[0], ci)
        self._watch(cl[1], ci)

    def _propagate(self) -> int:
        """Exhaust unit propagation; return a conflicting clause index or -1."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            falsified = -lit
            ws = self.watches.get(falsified)
            if not ws:
                continue
            kept: list[int] = []
            i = 0
            while i < len(ws):
                ci = ws[i]
                i += 1
                cl = self.clauses[ci]
                if cl[0] == falsified:
                    cl[0], cl[1] = cl[1], cl[0]
                first = cl[0]
                if self._value(first) == 1:
                    kept.append(ci)
                    continue
                moved = False
                for k in range(2, len(cl)):
                    if self._value(cl[k]) != -1:
                        cl[1], cl[k] = cl[k], cl[1]
                        self._watch(cl[1], ci)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(ci)
                if self._value(first) == -1:
                    kept.extend(ws[i:])
                    self.watches[falsified] = kept
                    return ci
                self._enqueue(first, ci)
            self.watches[falsified] = kept
        return -1

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.nv + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, conflict: int) -> tuple[list[int], int]:
        learnt: list[int] = [0]
        seen = [False] * (self.nv + 1)
        counter = 0
        p = 0
        ci = conflict
        index = len(self.trail) - 1
        current = len(self.trail_lim)
        while True:
            cl = self.clauses[ci]
            for q in (cl if p == 0 else cl[1:]):
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] == current:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[index])]:
                index -= 1
            p = self.trail[index]
            index -= 1
            v = abs(p)
            seen[v] = False
            counter -= 1
            if counter == 0:
                break
            ci = self.reason[v]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        # watch a literal from the backjump level at position 1
        max_i = max(range(1, len(learnt)), key=lambda k: self.level[abs(learnt[k])])
        learnt[1], learnt[max_i] = learnt[max_i], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _backtrack(self, target_level: int) -> None:
        while self.trail_lim and len(self.trail_lim) > target_level:
            boundary = self.trail_lim.pop()
            while len(self.trail) > boundary:
                lit = self.trail.pop()
                v = abs(lit)
                self.polarity[v] = lit > 0
                self.assign[v] = 0
                self.reason[v] = -1
                heappush(self.heap, (-self.activity[v], v))
        self.qhead = len(self.trail)

    def _decide(self) -> int:
        while self.heap:
            negact, v = heappop(self.heap)
            if self.assign[v] == 0 and -negact == self.activity[v]:
                return v if self.polarity[v] else -v
        for v in range(1, self.nv + 1):  # safety net for stale heap entries
            if self.assign[v] == 0:
                return v if self.polarity[v] else -v
        return 0

    def solve(self, budget: Budget) -> SatResult:
        if not self.ok or self._propagate() != -1:
            return SatResult("unsat")
        conflicts = 0
        restarts = 0
        luby = _Luby(100)
        limit = luby.limit(0)
        since_restart = 0
        deadline = None
        if budget.max_seconds is not None:
            deadline = time.monotonic() + budget.max_seconds
        while True:
            lit = self._decide()
            if lit == 0:
                model = [False] * (self.nv + 1)
                for v in range(1, self.nv + 1):
                    model[v] = self.assign[v] == 1
                return SatResult("sat", model=model)
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, -1)
            while True:
                conflict = self._propagate()
                if conflict == -1:
                    break
                conflicts += 1
                since_restart += 1
                if budget.max_conflicts is not None and conflicts > budget.max_conflicts:
                    return SatResult("unknown", reason="conflict budget exhausted")
                if deadline is not None and conflicts % 256 == 0 and time.monotonic() > deadline:
                    return SatResult("unknown", reason="timeout")
                if not self.trail_lim:
                    return SatResult("unsat")
                learnt, back_level = self._analyze(conflict)
                self._backtrack(back_level)
                self.var_inc /= 0.95
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], -1):
                        return SatResult("unsat")
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self._watch(learnt[0], ci)
                    self._watch(learnt[1], ci)
                    self._enqueue(learnt[0], ci)
            if since_restart >= limit:
                since_restart = 0
                restarts += 1
                limit = luby.limit(restarts)
                self._backtrack(0)


def solve_internal(formula: CnfFormula, budget: Optional[Budget] = None, seed: int = 0) -> SatResult:
    """Complete search on a plain-CNF formula (lower parity constraints first)."""
    del seed  # branching is fully deterministic; accepted for interface stability
    if formula.xors:
        raise MalformedFormulaError("internal solver takes lowered CNF only")
    if formula.infeasible:
        return SatResult("unsat")
    solver = _Cdcl(formula.num_vars, formula.clauses)
    result = solver.solve(budget or Budget())
    if result.is_sat and not verify_model(formula, result.model):
        raise ModelVerificationError("internal solver produced a non-satisfying model")
    return result


def _dimacs_path(text: str, keep: bool) -> tuple[str, bool]:
    if keep:
        cache_dir = os.environ.get(CACHE_DIR_ENV) or tempfile.gettempdir()
        os.makedirs(cache_dir, exist_ok=True)
        digest = hashlib.sha256(text.encode()).hexdigest()[:24]
        path = os.path.join(cache_dir, f"tricenter-{digest}.cnf")
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
        return path, False
    fd, path = tempfile.mkstemp(suffix=".cnf", prefix="tricenter-")
    with os.fdopen(fd, "w", encoding="ascii") as fh:
        fh.write(text)
    return path, True


def solve_external(
    command: str,
    formula: CnfFormula,
    with_xor: bool = False,
    timeout: Optional[float] = None,
    keep_files: bool = False,
) -> SatResult:
    """Run `<command> <cnf-path>` and parse the standard solver output.

    Returns UNKNOWN on solver failure; raises ModelVerificationError when a
    claimed model does not satisfy the formula.
    """
    work = formula if with_xor else (xor_to_cnf(formula) if formula.xors else formula)
    text = emit_dimacs(work, with_xor=with_xor and bool(work.xors))
    path, unlink = _dimacs_path(text, keep_files)
    try:
        argv = shlex.split(command) + [path]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=timeout
            )
        except subprocess.TimeoutExpired:
            return SatResult("unknown", reason="timeout")
        except OSError as exc:
            return SatResult("unknown", reason=f"external-failure: {exc}")
        status = None
        values: list[int] = []
        for line in proc.stdout.splitlines():
            line = line.strip()
            if line.startswith("s "):
                token = line[2:].strip().upper()
                if token == "SATISFIABLE":
                    status = "sat"
                elif token == "UNSATISFIABLE":
                    status = "unsat"
            elif line.startswith("v ") or line == "v":
                values.extend(int(tok) for tok in line[1:].split())
        if status is None:
            if proc.returncode == 10:
                status = "sat"
            elif proc.returncode == 20:
                status = "unsat"
            else:
                return SatResult(
                    "unknown", reason=f"external-failure: exit {proc.returncode}"
                )
        if status == "unsat":
            return SatResult("unsat")
        model = [False] * (work.num_vars + 1)
        seen_any = False
        for lit in values:
            if lit == 0:
                continue
            v = abs(lit)
            if v > work.num_vars:
                continue
            model[v] = lit > 0
            seen_any = True
        if not seen_any:
            return SatResult("unknown", reason="external-failure: no model values")
        if not verify_model(work, model):
            raise ModelVerificationError(
                "external solver returned a non-satisfying model"
            )
        return SatResult("sat", model=model[: formula.num_vars + 1])
    finally:
        if unlink:
            os.unlink(path)


def solve(formula: CnfFormula, config: Optional[SolverConfig] = None) -> SatResult:
    """Dispatch to the configured backend, lowering parity constraints when the
    backend cannot take them natively; SAT models are verified and projected
    onto the original variables."""
    config = config or SolverConfig()
    if formula.infeasible:
        return SatResult("unsat")
    if config.command is not None:
        result = solve_external(
            config.command,
            formula,
            with_xor=config.with_xor,
            timeout=config.timeout,
            keep_files=config.keep_files,
        )
        if result.is_sat:
            result = SatResult("sat", model=result.model[: formula.num_vars + 1])
        return result
    work = xor_to_cnf(formula) if formula.xors else formula
    result = solve_internal(work, budget=config.budget, seed=config.seed)
    if result.is_sat:
        model = result.model[: formula.num_vars + 1]
        if not verify_model(formula, model):
            raise ModelVerificationError("internal solver model failed verification")
        return SatResult("sat", model=model)
    return result
