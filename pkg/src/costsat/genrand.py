"""Seeded random systems and problems for property testing."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field
from typing import Callable

from .model import Action, FactoredSystem, Problem, State, execute_sequence, validate_problem

COST_MODES = ("all-unit", "no-zero", "with-zero", "mixed")


@dataclass(frozen=True)
class GenSpec:
    """Knobs for the generator.

    ``zero_density`` is the per-action probability of cost 0 in ``mixed``
    mode; ``with-zero`` mode additionally guarantees at least one 0-cost
    action. ``goal_walk`` bounds the random walk used to place the goal.
    """

    min_vars: int = 2
    max_vars: int = 3
    min_actions: int = 1
    max_actions: int = 5
    cost_mode: str = "mixed"
    max_cost: int = 3
    zero_density: float = 0.3
    pre_density: float = 0.4
    eff_density: float = 0.5
    goal_size: int = 2
    goal_walk: int = 4
    solvable: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.cost_mode not in COST_MODES:
            raise ValueError(f"cost_mode must be one of {COST_MODES}")
        if not (1 <= self.min_vars <= self.max_vars and 0 <= self.min_actions <= self.max_actions):
            raise ValueError("empty variable or action range")

    def with_seed(self, seed: int) -> "GenSpec":
        return GenSpec(**{**asdict(self), "seed": seed})

    @classmethod
    def from_dict(cls, data: dict) -> "GenSpec":
        return cls(**data)


def _random_partial(rng: random.Random, variables: list[str], density: float) -> dict[str, bool]:
    return {v: rng.random() < 0.5 for v in variables if rng.random() < density}


def _draw_system(rng: random.Random, spec: GenSpec) -> FactoredSystem:
    nvars = rng.randint(spec.min_vars, spec.max_vars)
    variables = [f"v{k}" for k in range(1, nvars + 1)]
    nacts = rng.randint(spec.min_actions, spec.max_actions)
    actions = []
    for k in range(1, nacts + 1):
        pre = _random_partial(rng, variables, spec.pre_density)
        eff = _random_partial(rng, variables, spec.eff_density)
        if not eff:
            v = rng.choice(variables)
            eff = {v: rng.random() < 0.5}
        actions.append(Action(State(pre), State(eff), f"a{k}"))
    return FactoredSystem(actions, declared=variables)


def _draw_costs(rng: random.Random, spec: GenSpec, actions) -> dict[Action, int]:
    mode = spec.cost_mode
    costs = {}
    for a in actions:
        if mode == "all-unit":
            costs[a] = 1
        elif mode == "no-zero":
            costs[a] = rng.randint(1, max(1, spec.max_cost))
        elif rng.random() < spec.zero_density:
            costs[a] = 0
        else:
            costs[a] = rng.randint(1, max(1, spec.max_cost))
    # structurally identical actions must agree on cost
    first: dict[tuple, int] = {}
    for a in actions:
        costs[a] = first.setdefault(a.structure, costs[a])
    if mode == "with-zero" and actions and 0 not in costs.values():
        pick = rng.choice(list(actions))
        for a in actions:
            if a.structure == pick.structure:
                costs[a] = 0
    return costs


def gen_system(spec: GenSpec) -> FactoredSystem:
    return _draw_system(random.Random(spec.seed), spec)


def gen_problem(spec: GenSpec) -> Problem:
    """A random problem; deterministic in ``spec``.

    Solvable problems take their goal from the end of a random walk from the
    initial state. Unsolvable ones additionally get a fresh goal variable that
    no action touches, pinned opposite to its initial value.
    """
    rng = random.Random(spec.seed)
    sys = _draw_system(rng, spec)
    costs = _draw_costs(rng, spec, sys.actions)
    variables = sys.variables
    init = State({v: rng.random() < 0.5 for v in variables})
    walk = [rng.choice(sys.actions) for _ in range(rng.randint(0, spec.goal_walk))] if sys.actions else []
    end = execute_sequence(init, walk)
    picked = rng.sample(variables, min(spec.goal_size, len(variables)))
    goal = {v: end[v] for v in picked}
    if not spec.solvable:
        idle = "stuck"
        sys = FactoredSystem(sys.actions, declared=set(variables) | {idle})
        init = State({**init, idle: False})
        goal[idle] = True
    prob = Problem(sys, costs, init, State(goal), name=f"gen-{spec.seed}")
    assert not validate_problem(prob)
    return prob


def problem_without(prob: Problem, drop: Action) -> Problem:
    keep = [a for a in prob.system.actions if a != drop]
    sys = FactoredSystem(keep, declared=prob.system.domain)
    return Problem(sys, {a: prob.costs[a] for a in keep}, prob.init, prob.goal, prob.name)


def problem_without_var(prob: Problem, var: str) -> Problem:
    """Drop ``var`` everywhere: from action conditions, init and goal."""
    def strip(x: State) -> State:
        return State((v, b) for v, b in x.items_sorted() if v != var)

    mapping = {}
    for a in prob.system.actions:
        mapping[a] = Action(strip(a.pre), strip(a.eff), a.name)
    sys = FactoredSystem(mapping.values(), declared=prob.system.domain - {var})
    costs = {}
    for old, new in mapping.items():
        costs.setdefault(new, prob.costs[old])
    return Problem(sys, costs, strip(prob.init), strip(prob.goal), prob.name)


def shrink(prob: Problem, fails: Callable[[Problem], bool]) -> Problem:
    """Greedily remove actions and variables while ``fails`` stays true."""
    assert fails(prob)
    changed = True
    while changed:
        changed = False
        for a in list(prob.system.actions):
            smaller = problem_without(prob, a)
            if fails(smaller):
                prob, changed = smaller, True
                break
        if changed:
            continue
        for v in prob.system.variables:
            smaller = problem_without_var(prob, v)
            if not validate_problem(smaller) and fails(smaller):
                prob, changed = smaller, True
                break
    return prob
