"""States, actions, factored systems and planning problems.

States are partial assignments of boolean values to variable names. Variables
are plain strings and are ordered lexicographically wherever iteration order
matters, so every derived artifact (state spaces, encodings, reports) is
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

Var = str
Plan = tuple  # tuple[Action, ...]


class State(Mapping[Var, bool]):
    """Immutable, hashable partial assignment ``Var -> bool``."""

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, assignment: Mapping[Var, bool] | Iterable[tuple[Var, bool]] = ()):
        items = dict(assignment)
        self._items = tuple(sorted((v, bool(b)) for v, b in items.items()))
        self._map = dict(self._items)
        self._hash = hash(self._items)

    @classmethod
    def from_literals(cls, literals: Iterable[str]) -> "State":
        """Build a state from literals such as ``"a"`` and ``"-b"``.

        Contradictory literals raise ``ValueError``.
        """
        out: dict[Var, bool] = {}
        for lit in literals:
            var, val = parse_literal(lit)
            if out.get(var, val) != val:
                raise ValueError(f"contradictory literals for {var!r}")
            out[var] = val
        return cls(out)

    def __getitem__(self, var: Var) -> bool:
        return self._map[var]

    def __iter__(self) -> Iterator[Var]:
        return (v for v, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, State):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self._map == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        return "State({" + ", ".join(literal(v, b) for v, b in self._items) + "})"

    @property
    def domain(self) -> frozenset[Var]:
        return frozenset(self._map)

    def items_sorted(self) -> tuple[tuple[Var, bool], ...]:
        return self._items

    def literals(self) -> list[str]:
        return [literal(v, b) for v, b in self._items]

    def issubset(self, other: Mapping[Var, bool]) -> bool:
        """Maplet containment: every ``v -> b`` of ``self`` is in ``other``."""
        for v, b in self._items:
            if v not in other or other[v] != b:
                return False
        return True

    __le__ = issubset

    def union(self, other: Mapping[Var, bool]) -> "State":
        return state_union(self, other)

    def project(self, variables: Iterable[Var]) -> "State":
        keep = set(variables)
        return State((v, b) for v, b in self._items if v in keep)


def literal(var: Var, value: bool) -> str:
    return var if value else "-" + var


def parse_literal(lit: str) -> tuple[Var, bool]:
    lit = lit.strip()
    if lit.startswith("-"):
        var, value = lit[1:], False
    else:
        var, value = lit, True
    if not var or var.startswith("-"):
        raise ValueError(f"malformed literal {lit!r}")
    return var, value


def state_union(x1: Mapping[Var, bool], x2: Mapping[Var, bool]) -> State:
    """Union of two states; ``x1`` takes precedence on shared variables."""
    merged = dict(x2)
    merged.update(x1)
    return State(merged)


@dataclass(frozen=True)
class Action:
    """A ``(pre, eff)`` pair with an optional label.

    Equality and hashing include the label, so two structurally equal actions
    with different names are distinct members of a system.
    """

    pre: State
    eff: State
    name: str = ""

    @classmethod
    def make(cls, pre: Iterable[str] = (), eff: Iterable[str] = (), name: str = "") -> "Action":
        return cls(State.from_literals(pre), State.from_literals(eff), name)

    @property
    def domain(self) -> frozenset[Var]:
        return self.pre.domain | self.eff.domain

    @property
    def structure(self) -> tuple:
        return (self.pre.items_sorted(), self.eff.items_sorted())

    def sort_key(self) -> tuple:
        return (self.name, self.structure)

    def __repr__(self) -> str:
        label = f"{self.name}: " if self.name else ""
        return f"Action({label}{self.pre.literals()} -> {self.eff.literals()})"


@dataclass(frozen=True)
class FactoredSystem:
    """A set of actions.

    ``declared`` lists variables that belong to the domain even when no action
    mentions them (an input file may declare idle variables).
    """

    actions: tuple[Action, ...]
    declared: frozenset[Var] = frozenset()

    def __init__(self, actions: Iterable[Action] = (), declared: Iterable[Var] = ()):
        uniq = dict.fromkeys(actions)
        object.__setattr__(self, "actions", tuple(sorted(uniq, key=Action.sort_key)))
        object.__setattr__(self, "declared", frozenset(declared))

    @property
    def domain(self) -> frozenset[Var]:
        dom = set(self.declared)
        for a in self.actions:
            dom |= a.domain
        return frozenset(dom)

    @property
    def variables(self) -> list[Var]:
        return sorted(self.domain)

    def __contains__(self, action: object) -> bool:
        return action in self._action_set

    def __iter__(self) -> Iterator[Action]:
        return iter(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def _action_set(self) -> frozenset[Action]:
        cached = self.__dict__.get("_aset")
        if cached is None:
            cached = frozenset(self.actions)
            object.__setattr__(self, "_aset", cached)
        return cached


class MissingCostError(KeyError):
    """An action has no entry in the cost map."""


@dataclass(frozen=True, eq=False)
class Problem:
    system: FactoredSystem
    costs: Mapping[Action, int]
    init: State
    goal: State
    name: str = field(default="")

    def cost(self, action: Action) -> int:
        try:
            return self.costs[action]
        except KeyError:
            raise MissingCostError(f"no cost for {action!r}") from None

    def with_costs(self, costs: Mapping[Action, int]) -> "Problem":
        return Problem(self.system, dict(costs), self.init, self.goal, self.name)

    def map_costs(self, f) -> "Problem":
        """The problem with cost map ``f . costs``."""
        return self.with_costs({a: f(c) for a, c in self.costs.items()})

    def action_by_name(self, name: str) -> Action:
        for a in self.system.actions:
            if a.name == name:
                return a
        raise KeyError(name)


def execute_action(x: State, a: Action) -> State:
    if not a.pre.issubset(x):
        return x
    return state_union(a.eff, x)


def execute_sequence(x: State, plan: Iterable[Action]) -> State:
    for a in plan:
        x = execute_action(x, a)
    return x


def trajectory(x: State, plan: Iterable[Action]) -> list[State]:
    """States traversed by executing ``plan`` from ``x``, ``x`` included."""
    out = [x]
    for a in plan:
        x = execute_action(x, a)
        out.append(x)
    return out


def plan_cost(costs: Mapping[Action, int], plan: Iterable[Action]) -> int:
    total = 0
    for a in plan:
        try:
            total += costs[a]
        except KeyError:
            raise MissingCostError(f"no cost for {a!r}") from None
    return total


def is_solution(prob: Problem, plan: Sequence[Action]) -> bool:
    if any(a not in prob.system for a in plan):
        return False
    return prob.goal.issubset(execute_sequence(prob.init, plan))


def unmet_goals(prob: Problem, plan: Sequence[Action]) -> list[str]:
    end = execute_sequence(prob.init, plan)
    return [literal(v, b) for v, b in prob.goal.items_sorted() if end.get(v) != b]


@dataclass(frozen=True)
class Defect:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def validate_problem(prob: Problem) -> list[Defect]:
    """Well-formedness defects of ``prob``; empty when it is a proper problem."""
    defects: list[Defect] = []
    dom = prob.system.domain
    if prob.init.domain != dom:
        missing = sorted(dom - prob.init.domain)
        extra = sorted(prob.init.domain - dom)
        detail = []
        if missing:
            detail.append("missing " + ", ".join(missing))
        if extra:
            detail.append("unknown " + ", ".join(extra))
        defects.append(Defect("invalid-init", "init is not a valid state (" + "; ".join(detail) + ")"))
    if not prob.goal.domain <= dom:
        extra = sorted(prob.goal.domain - dom)
        defects.append(Defect("invalid-goal", "goal mentions unknown variables " + ", ".join(extra)))
    for a in prob.system.actions:
        if a not in prob.costs:
            defects.append(Defect("partial-cost-map", f"no cost for {a!r}"))
        elif not isinstance(prob.costs[a], int) or prob.costs[a] < 0:
            defects.append(Defect("bad-cost", f"cost of {a!r} is not a nonnegative integer"))
    seen: dict[tuple, Action] = {}
    for a in prob.system.actions:
        other = seen.setdefault(a.structure, a)
        if other is not a and prob.costs.get(a) != prob.costs.get(other):
            defects.append(Defect(
                "conflicting-costs",
                f"{other.name!r} and {a.name!r} are the same action with different costs",
            ))
    return defects
