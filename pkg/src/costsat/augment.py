"""Compiling action costs into a binary counter carried in the state."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd
from typing import Iterable, Mapping

from .model import Action, FactoredSystem, Problem, State, state_union


class BudgetError(ValueError):
    """A counter value or augmented action falls outside the cost budget."""


@dataclass(frozen=True)
class CounterSpec:
    """Counter for budget ``C``: ``ceil(log2(C + 1))`` fresh bits, LSB first."""

    budget: int
    vars: tuple[str, ...]

    @property
    def width(self) -> int:
        return len(self.vars)

    @classmethod
    def for_budget(cls, budget: int, taken: Iterable[str] = ()) -> "CounterSpec":
        if budget < 0:
            raise BudgetError(f"negative budget {budget}")
        taken = set(taken)
        prefix = "u"
        while any(v.startswith(prefix) for v in taken):
            prefix = "_" + prefix
        width = budget.bit_length()
        return cls(budget, tuple(f"{prefix}{k}" for k in range(1, width + 1)))


def counter_state(spec: CounterSpec, i: int) -> State:
    if not 0 <= i < 1 << spec.width:
        raise BudgetError(f"{i} is not representable with {spec.width} bits")
    return State((v, bool(i >> k & 1)) for k, v in enumerate(spec.vars))


def decode_counter(spec: CounterSpec, x: Mapping[str, bool]) -> int:
    return sum(1 << k for k, v in enumerate(spec.vars) if x[v])


def augment_action(a: Action, i: int, c: int, spec: CounterSpec) -> Action:
    """``a`` restricted to counter value ``i`` and advancing it by ``c``."""
    if i < 0 or c < 0 or i + c > spec.budget:
        raise BudgetError(f"counter {i} + cost {c} exceeds budget {spec.budget}")
    return Action(
        state_union(a.pre, counter_state(spec, i)),
        state_union(a.eff, counter_state(spec, i + c)),
        f"{a.name}@{i}",
    )


def augment_system(sys: FactoredSystem, costs: Mapping[Action, int], budget: int,
                   spec: CounterSpec | None = None) -> tuple[FactoredSystem, CounterSpec]:
    sys_aug, spec, _ = _augment(sys, costs, budget, spec)
    return sys_aug, spec


def _augment(sys, costs, budget, spec=None):
    spec = spec or CounterSpec.for_budget(budget, sys.domain)
    origin: dict[Action, tuple[Action, int]] = {}
    for a in sys.actions:
        c = costs[a]
        for i in range(budget - c + 1):
            origin[augment_action(a, i, c, spec)] = (a, i)
    return FactoredSystem(origin, declared=sys.domain | set(spec.vars)), spec, origin


@dataclass(frozen=True, eq=False)
class AugmentedProblem:
    base: Problem
    spec: CounterSpec
    augmented: Problem
    # augmented action -> (base action, counter value it fires at)
    origin: Mapping[Action, tuple[Action, int]]


def augment_problem(prob: Problem, budget: int) -> AugmentedProblem:
    sys_aug, spec, origin = _augment(prob.system, prob.costs, budget)
    costs = {aug: prob.costs[base] for aug, (base, _) in origin.items()}
    augmented = Problem(
        sys_aug,
        costs,
        state_union(prob.init, counter_state(spec, 0)),
        prob.goal,
        name=f"{prob.name}^{budget}",
    )
    return AugmentedProblem(prob, spec, augmented, origin)


def cost_gcd(prob: Problem) -> int:
    g = reduce(gcd, (prob.costs[a] for a in prob.system.actions), 0)
    return g or 1


def scale_problem(prob: Problem) -> tuple[Problem, int]:
    """Divide every cost by their gcd; an all-zero cost map scales by 1."""
    g = cost_gcd(prob)
    if g == 1:
        return prob, 1
    return prob.map_costs(lambda c: c // g), g


def factor_with_origins(sys: FactoredSystem) -> tuple[FactoredSystem, dict[Action, tuple[Action, ...]]]:
    """Greedily merge ``({v} | p, e)`` and ``({-v} | p, e)`` into ``(p, e)``.

    Returns the factored system and, for each of its actions, the original
    actions it stands for. Structural duplicates collapse into one action.
    """
    groups: dict[tuple, tuple[Action, ...]] = {}
    for a in sys.actions:
        groups[a.structure] = groups.get(a.structure, ()) + (a,)
    changed = True
    while changed:
        changed = False
        for key in sorted(groups):
            if key not in groups:
                continue
            pre, eff = key
            for v, b in pre:
                if not b:
                    continue
                twin = (tuple((w, False if w == v else c) for w, c in pre), eff)
                if twin in groups:
                    merged = (tuple((w, c) for w, c in pre if w != v), eff)
                    groups[merged] = groups.pop(key) + groups.pop(twin) + groups.pop(merged, ())
                    changed = True
                    break
    origins = {}
    for (pre, eff), members in sorted(groups.items()):
        if len(members) == 1:
            action = members[0]
        else:
            action = Action(State(pre), State(eff), "|".join(m.name for m in members))
        origins[action] = members
    return FactoredSystem(origins, declared=sys.domain), origins


def factor_actions(sys: FactoredSystem) -> FactoredSystem:
    return factor_with_origins(sys)[0]
