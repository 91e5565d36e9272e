"""Bounded-horizon sequential SAT encoding of planning problems.

Variables ``x[t, v]`` (state variable ``v`` at step ``t``, ``0 <= t <= h``)
and ``a[t, π]`` (action ``π`` taken between steps ``t`` and ``t + 1``).
At most one action per step; a step with no action keeps the state, so a
horizon ``h`` admits every plan of length ``<= h``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import Action, Plan, Problem, State, validate_problem


class EncodingError(ValueError):
    pass


class DecodeError(RuntimeError):
    """A model is inconsistent with the encoding it supposedly satisfies."""


def normalize_clause(lits: Iterable[int]) -> tuple[int, ...] | None:
    """Sorted, duplicate-free clause, or ``None`` for a tautology."""
    uniq = set(lits)
    if 0 in uniq:
        raise ValueError("0 is not a literal")
    if any(-lit in uniq for lit in uniq):
        return None
    return tuple(sorted(uniq, key=lambda lit: (abs(lit), lit)))


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        normal = []
        for c in self.clauses:
            nc = normalize_clause(c)
            if nc is None:
                continue
            if nc and abs(nc[-1]) > self.num_vars:
                raise ValueError(f"literal {nc[-1]} exceeds variable count {self.num_vars}")
            normal.append(nc)
        object.__setattr__(self, "clauses", tuple(normal))

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]], num_vars: int | None = None) -> "Cnf":
        clauses = [tuple(c) for c in clauses]
        if num_vars is None:
            num_vars = max((abs(lit) for c in clauses for lit in c), default=0)
        return cls(num_vars, tuple(clauses))

    def __len__(self) -> int:
        return len(self.clauses)


def emit_dimacs(cnf: Cnf, comments: Sequence[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    lines.extend(" ".join(map(str, c)) + " 0" if c else "0" for c in cnf.clauses)
    return "\n".join(lines) + "\n"


@dataclass
class EncodingMeta:
    horizon: int
    state_var_index: dict[tuple[int, str], int] = field(default_factory=dict)
    action_var_index: dict[tuple[int, Action], int] = field(default_factory=dict)
    num_vars: int = 0

    def state_at(self, model, t: int) -> State:
        return State((v, bool(model[idx])) for (step, v), idx in self.state_var_index.items() if step == t)

    def to_json(self, extra: Mapping | None = None) -> str:
        doc = {
            "horizon": self.horizon,
            "num_vars": self.num_vars,
            "state_vars": [
                {"index": idx, "step": t, "var": v}
                for (t, v), idx in sorted(self.state_var_index.items(), key=lambda kv: kv[1])
            ],
            "action_vars": [
                {"index": idx, "step": t, "action": a.name}
                for (t, a), idx in sorted(self.action_var_index.items(), key=lambda kv: kv[1])
            ],
        }
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _at_most_one(xs: Sequence[int], new_var, mode: str) -> list[tuple[int, ...]]:
    if len(xs) < 2:
        return []
    if mode == "pairwise":
        return [(-xs[i], -xs[j]) for i in range(len(xs)) for j in range(i + 1, len(xs))]
    if mode == "sequential":
        # Sinz sequential counter: s[i] <=> some of xs[0..i] is true
        s = [new_var() for _ in range(len(xs) - 1)]
        out = [(-xs[0], s[0])]
        for i in range(1, len(xs) - 1):
            out += [(-xs[i], s[i]), (-s[i - 1], s[i]), (-xs[i], -s[i - 1])]
        out.append((-xs[-1], -s[-1]))
        return out
    raise EncodingError(f"unknown at-most-one encoding {mode!r}")


def encode_bounded(prob: Problem, horizon: int, amo: str = "pairwise") -> tuple[Cnf, EncodingMeta]:
    """CNF satisfiable iff ``prob`` has a plan of at most ``horizon`` actions.

    Only applicable actions can be selected; an inapplicable action is a
    no-op and dropping it never makes a plan longer or more expensive.
    """
    defects = validate_problem(prob)
    if defects:
        raise EncodingError("; ".join(map(str, defects)))
    if horizon < 0:
        raise EncodingError("negative horizon")
    variables = prob.system.variables
    actions = prob.system.actions
    meta = EncodingMeta(horizon)
    counter = [0]

    def new_var() -> int:
        counter[0] += 1
        return counter[0]

    for t in range(horizon + 1):
        for v in variables:
            meta.state_var_index[(t, v)] = new_var()
    for t in range(horizon):
        for a in actions:
            meta.action_var_index[(t, a)] = new_var()

    def lit(t: int, v: str, b: bool) -> int:
        idx = meta.state_var_index[(t, v)]
        return idx if b else -idx

    clauses: list[tuple[int, ...]] = []
    clauses += [(lit(0, v, b),) for v, b in prob.init.items_sorted()]
    clauses += [(lit(horizon, v, b),) for v, b in prob.goal.items_sorted()]

    setters: dict[tuple[str, bool], list[Action]] = {}
    for a in actions:
        for v, b in a.eff.items_sorted():
            setters.setdefault((v, b), []).append(a)

    for t in range(horizon):
        step_vars = [meta.action_var_index[(t, a)] for a in actions]
        for a, av in zip(actions, step_vars):
            clauses += [(-av, lit(t, v, b)) for v, b in a.pre.items_sorted()]
            clauses += [(-av, lit(t + 1, v, b)) for v, b in a.eff.items_sorted()]
        clauses += _at_most_one(step_vars, new_var, amo)
        for v in variables:
            for b in (True, False):
                # v flips to b only if an action setting v := b is taken
                support = [meta.action_var_index[(t, a)] for a in setters.get((v, b), ())]
                clauses.append((lit(t, v, b), lit(t + 1, v, not b), *support))

    meta.num_vars = counter[0]
    return Cnf(counter[0], tuple(clauses)), meta


def decode_plan(model, meta: EncodingMeta, origin: Mapping | None = None) -> Plan:
    """Read the plan off a satisfying assignment.

    ``origin`` optionally maps each encoded action either to a single action
    or to a sequence of ``(guard, action)`` candidates; a candidate is chosen
    when its guard holds in the model's state at that step.
    """
    by_step: dict[int, list[Action]] = {}
    for (t, a), idx in meta.action_var_index.items():
        if model[idx]:
            by_step.setdefault(t, []).append(a)
    plan = []
    for t in range(meta.horizon):
        taken = by_step.get(t, [])
        if len(taken) > 1:
            raise DecodeError(f"{len(taken)} actions selected at step {t}")
        if not taken:
            continue
        a = taken[0]
        if origin is not None:
            a = _resolve(origin[a], meta, model, t)
        plan.append(a)
    return tuple(plan)


def _resolve(target, meta: EncodingMeta, model, t: int) -> Action:
    if isinstance(target, Action):
        return target
    state = meta.state_at(model, t)
    for guard, action in target:
        if guard.issubset(state):
            return action
    raise DecodeError(f"no origin candidate applies at step {t}")
