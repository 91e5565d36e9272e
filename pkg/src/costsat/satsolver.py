"""CDCL SAT solver, DIMACS parsing, and a bridge to external solvers.

The embedded solver follows the MiniSat design: two watched literals, first-UIP
learning with local clause minimisation, VSIDS with phase saving, Luby
restarts and activity-based deletion of learned clauses.
"""

from __future__ import annotations

import enum
import heapq
import logging
import os
import random
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .encode import Cnf, emit_dimacs

log = logging.getLogger(__name__)

SOLVER_ENV = "COSTSAT_SOLVER"


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


class Model:
    """Total assignment over variables ``1..n``."""

    __slots__ = ("values",)

    def __init__(self, values: Sequence[bool]):
        self.values = tuple(bool(b) for b in values)

    @classmethod
    def from_literals(cls, lits: Iterable[int], num_vars: int) -> "Model":
        vals = [False] * num_vars
        for lit in lits:
            if lit and abs(lit) <= num_vars:
                vals[abs(lit) - 1] = lit > 0
        return cls(vals)

    def __getitem__(self, var: int) -> bool:
        if var < 1:
            raise IndexError(var)
        return self.values[var - 1]

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, Model) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def literals(self) -> list[int]:
        return [v if b else -v for v, b in enumerate(self.values, 1)]


@dataclass(frozen=True)
class SolveResult:
    status: Status
    model: Model | None = None
    reason: str | None = None  # "timeout", "conflicts" or "external-failure"
    verified: bool = True
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT

    @property
    def unsat(self) -> bool:
        return self.status is Status.UNSAT


@dataclass(frozen=True)
class Budget:
    time_limit: float | None = None
    conflict_limit: int | None = None


def check_model(cnf: Cnf, m: Model) -> bool:
    if len(m) < cnf.num_vars:
        raise ValueError(f"model covers {len(m)} of {cnf.num_vars} variables")
    vals = m.values
    for clause in cnf.clauses:
        if not any(vals[lit - 1] if lit > 0 else not vals[-lit - 1] for lit in clause):
            return False
    return True


def parse_dimacs(text: str) -> Cnf:
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise ParseError("duplicate header", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise ParseError("negative header count", lineno)
            continue
        if header is None:
            raise ParseError("clause before header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
            elif abs(lit) > header[0]:
                raise ParseError(f"literal {lit} out of range 1..{header[0]}", lineno)
            else:
                current.append(lit)
    if header is None:
        raise ParseError("missing header", 0)
    if current:
        clauses.append(current)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}", 0)
    return Cnf(header[0], tuple(tuple(c) for c in clauses))


class _Clause:
    __slots__ = ("lits", "learnt", "activity", "deleted")

    def __init__(self, lits: list[int], learnt: bool = False):
        self.lits = lits
        self.learnt = learnt
        self.activity = 0.0
        self.deleted = False


def _luby(i: int) -> int:
    """``i``-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class CDCLSolver:
    """Single-shot CDCL solver over a :class:`Cnf`.

    Literals are coded as ``2 * var`` (positive) and ``2 * var + 1``
    (negative), so negation is ``code ^ 1``.
    """

    restart_unit = 100
    var_decay = 0.95
    clause_decay = 0.999

    def __init__(self, cnf: Cnf, seed: int = 0):
        self.cnf = cnf
        n = cnf.num_vars
        self.n = n
        self.lval = [0] * (2 * n + 2)
        self.level = [0] * (n + 1)
        self.reason: list[_Clause | None] = [None] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[_Clause]] = [[] for _ in range(2 * n + 2)]
        self.clauses: list[_Clause] = []
        self.learnts: list[_Clause] = []
        self.learnt_units: list[int] = []
        rng = random.Random(seed)
        self.activity = [rng.random() * 1e-5 for _ in range(n + 1)]
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.polarity = [True] * (n + 1)  # True means "try negative first"
        self.heap = [(-self.activity[v], v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.ok = True
        for c in cnf.clauses:
            self._add_input_clause(c)

    @staticmethod
    def _code(lit: int) -> int:
        return 2 * lit if lit > 0 else -2 * lit + 1

    def _add_input_clause(self, clause: Sequence[int]) -> None:
        if not self.ok:
            return
        lits = [self._code(lit) for lit in clause]
        if not lits:
            self.ok = False
            return
        if len(lits) == 1:
            val = self.lval[lits[0]]
            if val == -1:
                self.ok = False
            elif val == 0:
                self._assign(lits[0], None)
            return
        c = _Clause(lits)
        self.clauses.append(c)
        self.watches[lits[0] ^ 1].append(c)
        self.watches[lits[1] ^ 1].append(c)

    # watches[code] lists clauses to revisit when ``code`` becomes true,
    # i.e. clauses watching its negation.

    def _assign(self, code: int, reason: _Clause | None) -> None:
        v = code >> 1
        self.lval[code] = 1
        self.lval[code ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(code)

    def _propagate(self) -> _Clause | None:
        lval = self.lval
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = watches[p]
            kept = []
            i = 0
            nws = len(ws)
            while i < nws:
                c = ws[i]
                i += 1
                if c.deleted:
                    continue
                lits = c.lits
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], false_lit
                first = lits[0]
                if lval[first] == 1:
                    kept.append(c)
                    continue
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if lval[lk] != -1:
                        lits[1], lits[k] = lk, false_lit
                        watches[lk ^ 1].append(c)
                        break
                else:
                    kept.append(c)
                    if lval[first] == -1:
                        kept.extend(ws[i:])
                        watches[p] = kept
                        self.qhead = len(trail)
                        return c
                    self._assign(first, c)
            watches[p] = kept
        return None

    def _bump_var(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.n + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[u], u) for u in range(1, self.n + 1) if self.lval[2 * u] == 0]
            heapq.heapify(self.heap)
        elif self.lval[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _bump_clause(self, c: _Clause) -> None:
        c.activity += self.cla_inc
        if c.activity > 1e20:
            for d in self.learnts:
                d.activity *= 1e-20
            self.cla_inc *= 1e-20

    def _analyze(self, confl: _Clause) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        p = -1
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        level = self.level
        c = confl
        while True:
            if c.learnt:
                self._bump_clause(c)
            for q in (c.lits if p == -1 else c.lits[1:]):
                v = q >> 1
                if v not in seen and level[v] > 0:
                    seen.add(v)
                    self._bump_var(v)
                    if level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            c = self.reason[p >> 1]
            seen.discard(p >> 1)
            counter -= 1
            if counter == 0:
                break
        learnt[0] = p ^ 1
        # local minimisation: drop literals implied by the rest of the clause
        marks = {q >> 1 for q in learnt}
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = self.reason[q >> 1]
            if r is None or any((x >> 1) not in marks and level[x >> 1] > 0 for x in r.lits[1:]):
                kept.append(q)
        learnt = kept
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        act = self.activity
        for code in reversed(self.trail[stop:]):
            v = code >> 1
            self.lval[code] = 0
            self.lval[code ^ 1] = 0
            self.reason[v] = None
            self.polarity[v] = bool(code & 1)
            heapq.heappush(self.heap, (-act[v], v))
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick_branch(self) -> int | None:
        heap = self.heap
        lval = self.lval
        act = self.activity
        while heap:
            neg, v = heapq.heappop(heap)
            if lval[2 * v] == 0 and -neg == act[v]:
                return 2 * v + (1 if self.polarity[v] else 0)
        for v in range(1, self.n + 1):
            if lval[2 * v] == 0:
                return 2 * v + (1 if self.polarity[v] else 0)
        return None

    def _locked(self, c: _Clause) -> bool:
        v = c.lits[0] >> 1
        return self.reason[v] is c and self.lval[c.lits[0]] == 1

    def _reduce_db(self) -> None:
        self.learnts.sort(key=lambda c: c.activity)
        half = len(self.learnts) // 2
        keep = []
        for k, c in enumerate(self.learnts):
            if k < half and len(c.lits) > 2 and not self._locked(c):
                c.deleted = True
            else:
                keep.append(c)
        self.learnts = keep

    def _confirm_refutation(self) -> bool:
        """Independent level-0 unit propagation over all clauses must conflict."""
        val: dict[int, bool] = {}
        every = [c.lits for c in self.clauses] + [c.lits for c in self.learnts if not c.deleted]
        units = [self._code(c[0]) for c in self.cnf.clauses if len(c) == 1] + self.learnt_units
        if any(len(c) == 0 for c in self.cnf.clauses):
            return True
        for u in units:
            if val.get(u >> 1, not (u & 1)) != (not (u & 1)):
                return True
            val[u >> 1] = not (u & 1)
        changed = True
        while changed:
            changed = False
            for lits in every:
                free = None
                nfree = 0
                sat = False
                for q in lits:
                    b = val.get(q >> 1)
                    if b is None:
                        nfree += 1
                        free = q
                    elif b != bool(q & 1):
                        sat = True
                        break
                if sat:
                    continue
                if nfree == 0:
                    return True
                if nfree == 1:
                    val[free >> 1] = not (free & 1)
                    changed = True
        return False

    def solve(self, budget: Budget | None = None) -> SolveResult:
        budget = budget or Budget()
        start = time.monotonic()
        deadline = None if budget.time_limit is None else start + budget.time_limit
        if not self.ok or self._propagate() is not None:
            return self._unsat(start)
        max_learnts = max(len(self.clauses) / 3, 100.0)
        restart = 0
        while True:
            limit = _luby(restart) * self.restart_unit
            restart += 1
            found = 0
            while True:
                confl = self._propagate()
                if confl is not None:
                    self.conflicts += 1
                    found += 1
                    if not self.trail_lim:
                        return self._unsat(start)
                    learnt, back = self._analyze(confl)
                    self._cancel_until(back)
                    if len(learnt) == 1:
                        self.learnt_units.append(learnt[0])
                        self._assign(learnt[0], None)
                    else:
                        c = _Clause(learnt, learnt=True)
                        self.learnts.append(c)
                        self.watches[learnt[0] ^ 1].append(c)
                        self.watches[learnt[1] ^ 1].append(c)
                        self._bump_clause(c)
                        self._assign(learnt[0], c)
                    self.var_inc /= self.var_decay
                    self.cla_inc /= self.clause_decay
                    if budget.conflict_limit is not None and self.conflicts >= budget.conflict_limit:
                        return self._unknown("conflicts", start)
                    if deadline is not None and self.conflicts % 64 == 0 and time.monotonic() > deadline:
                        return self._unknown("timeout", start)
                    continue
                if found >= limit:
                    self._cancel_until(0)
                    break
                if len(self.learnts) - len(self.trail) >= max_learnts:
                    self._reduce_db()
                if deadline is not None and self.decisions % 256 == 0 and time.monotonic() > deadline:
                    return self._unknown("timeout", start)
                nxt = self._pick_branch()
                if nxt is None:
                    return self._sat(start)
                self.decisions += 1
                self.trail_lim.append(len(self.trail))
                self._assign(nxt, None)
            max_learnts *= 1.1

    def _stats(self, start: float) -> dict:
        return {
            "conflicts": self.conflicts,
            "decisions": self.decisions,
            "propagations": self.propagations,
            "seconds": round(time.monotonic() - start, 6),
        }

    def _sat(self, start: float) -> SolveResult:
        model = Model([self.lval[2 * v] == 1 for v in range(1, self.n + 1)])
        if not check_model(self.cnf, model):
            raise AssertionError("embedded solver produced a non-model")
        return SolveResult(Status.SAT, model, stats=self._stats(start))

    def _unsat(self, start: float) -> SolveResult:
        if not self._confirm_refutation():
            raise AssertionError("embedded solver refutation failed its level-0 check")
        return SolveResult(Status.UNSAT, stats=self._stats(start))

    def _unknown(self, reason: str, start: float) -> SolveResult:
        return SolveResult(Status.UNKNOWN, reason=reason, stats=self._stats(start))


def solve_cnf(cnf: Cnf, budget: Budget | None = None, seed: int = 0) -> SolveResult:
    return CDCLSolver(cnf, seed=seed).solve(budget)


def default_external_command() -> str | None:
    return os.environ.get(SOLVER_ENV) or None


def solve_external(cnf: Cnf, solver_command: str | None = None, budget: Budget | None = None) -> SolveResult:
    """Run a DIMACS solver as a subprocess.

    The CNF file path is appended to ``solver_command``. The solver must
    print ``s SATISFIABLE`` / ``s UNSATISFIABLE`` and ``v`` value lines on
    stdout. UNSAT answers cannot be checked and are marked unverified.
    """
    budget = budget or Budget()
    command = solver_command or default_external_command()
    if not command:
        return SolveResult(Status.UNKNOWN, reason="external-failure",
                           stats={"error": f"no solver command (set {SOLVER_ENV})"})
    start = time.monotonic()
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
        fh.write(emit_dimacs(cnf))
        path = fh.name
    try:
        proc = subprocess.run(
            shlex.split(command) + [path],
            capture_output=True, text=True, timeout=budget.time_limit,
        )
    except subprocess.TimeoutExpired:
        return SolveResult(Status.UNKNOWN, reason="timeout")
    except OSError as exc:
        return SolveResult(Status.UNKNOWN, reason="external-failure", stats={"error": str(exc)})
    finally:
        os.unlink(path)
    stats = {"seconds": round(time.monotonic() - start, 6), "returncode": proc.returncode}
    status_line = None
    lits: list[int] = []
    for line in proc.stdout.splitlines():
        if line.startswith("s "):
            status_line = line[2:].strip()
        elif line.startswith("v "):
            try:
                lits.extend(int(tok) for tok in line[2:].split())
            except ValueError:
                return SolveResult(Status.UNKNOWN, reason="external-failure",
                                   stats={**stats, "error": f"bad value line {line!r}"})
    if status_line == "UNSATISFIABLE":
        return SolveResult(Status.UNSAT, verified=False, stats=stats)
    if status_line == "SATISFIABLE":
        model = Model.from_literals(lits, cnf.num_vars)
        if check_model(cnf, model):
            return SolveResult(Status.SAT, model, stats=stats)
        log.warning("external solver model failed verification")
        return SolveResult(Status.UNKNOWN, reason="external-failure", stats=stats)
    if status_line == "UNKNOWN" and proc.returncode == 0:
        return SolveResult(Status.UNKNOWN, reason="timeout", stats=stats)
    stats["stderr"] = proc.stderr[-2000:]
    return SolveResult(Status.UNKNOWN, reason="external-failure", stats=stats)


@dataclass(frozen=True)
class SolverConfig:
    """Which solver to run and how long to let it try."""

    kind: str = "embedded"  # "embedded" or "external"
    command: str | None = None
    seed: int = 0
    conflict_limit: int | None = None

    def describe(self) -> str:
        return self.kind if self.kind == "embedded" else f"external={self.command}"


def solve(cnf: Cnf, config: SolverConfig | None = None, time_limit: float | None = None) -> SolveResult:
    config = config or SolverConfig()
    budget = Budget(time_limit, config.conflict_limit)
    if config.kind == "embedded":
        return solve_cnf(cnf, budget, seed=config.seed)
    if config.kind == "external":
        return solve_external(cnf, config.command, budget)
    raise ValueError(f"unknown solver kind {config.kind!r}")
