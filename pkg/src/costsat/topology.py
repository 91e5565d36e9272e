"""Exact, brute-force topological properties of factored state spaces.

Every metric here expands the full state space, so all of them refuse systems
above a variable cap. States are encoded as integers: bit ``k`` holds the value
of the ``k``-th variable in sorted order.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .model import Action, FactoredSystem, Plan, Problem, State, plan_cost

log = logging.getLogger(__name__)

STATE_SPACE_CAP = 16
RECURRENCE_CAP = 12
# Raised above the 8-vertex figure so 4-variable systems are measurable.
SUBLIST_CAP = 4


class CapExceeded(ValueError):
    """The system is too large for an exact brute-force metric."""

    def __init__(self, metric: str, nvars: int, cap: int):
        super().__init__(f"{metric}: {nvars} variables exceed the cap of {cap}")
        self.metric = metric
        self.nvars = nvars
        self.cap = cap


def _check_cap(metric: str, sys: FactoredSystem, cap: int) -> None:
    n = len(sys.domain)
    if n > cap:
        raise CapExceeded(metric, n, cap)


@dataclass(frozen=True)
class StateSpace:
    variables: tuple[str, ...]
    actions: tuple[Action, ...]
    # succ[s][j] is the state reached by executing actions[j] in state s
    succ: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.succ)

    @property
    def vertices(self) -> range:
        return range(self.size)

    def edges(self) -> list[tuple[int, int, int]]:
        """``(state, action index, successor)`` triples, self-loops included."""
        return [(s, j, t) for s, row in enumerate(self.succ) for j, t in enumerate(row)]

    def neighbours(self, s: int) -> set[int]:
        return {t for t in self.succ[s] if t != s}

    def encode(self, x: State) -> int:
        code = 0
        for k, v in enumerate(self.variables):
            if x[v]:
                code |= 1 << k
        return code

    def decode(self, code: int) -> State:
        return State((v, bool(code >> k & 1)) for k, v in enumerate(self.variables))


def action_masks(action: Action, variables: Sequence[str]) -> tuple[int, int, int, int]:
    """``(pre_mask, pre_val, eff_mask, eff_val)`` of ``action`` over ``variables``."""
    pos = {v: k for k, v in enumerate(variables)}
    pm = pv = em = ev = 0
    for v, b in action.pre.items_sorted():
        pm |= 1 << pos[v]
        if b:
            pv |= 1 << pos[v]
    for v, b in action.eff.items_sorted():
        em |= 1 << pos[v]
        if b:
            ev |= 1 << pos[v]
    return pm, pv, em, ev


def build_state_space(sys: FactoredSystem, cap: int = STATE_SPACE_CAP) -> StateSpace:
    _check_cap("state space", sys, cap)
    variables = tuple(sys.variables)
    masks = [action_masks(a, variables) for a in sys.actions]
    rows = []
    for s in range(1 << len(variables)):
        row = []
        for pm, pv, em, ev in masks:
            row.append((s & ~em) | ev if s & pm == pv else s)
        rows.append(tuple(row))
    return StateSpace(variables, tuple(sys.actions), tuple(rows))


def _bfs_distances(space: StateSpace, source: int, allowed: Sequence[int] | None = None) -> dict[int, int]:
    cols = range(len(space.actions)) if allowed is None else allowed
    dist = {source: 0}
    queue = deque([source])
    while queue:
        s = queue.popleft()
        row = space.succ[s]
        for j in cols:
            t = row[j]
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    return dist


def diameter(sys: FactoredSystem, cap: int = STATE_SPACE_CAP) -> int:
    """Longest shortest path between any ordered pair of connected states."""
    space = build_state_space(sys, cap)
    return max(max(_bfs_distances(space, s).values()) for s in space.vertices)


def recurrence_diameter(sys: FactoredSystem, cap: int = RECURRENCE_CAP) -> int:
    """Length of the longest simple path (no state traversed twice)."""
    _check_cap("recurrence diameter", sys, cap)
    space = build_state_space(sys, cap)
    adj = [sorted(space.neighbours(s)) for s in space.vertices]
    n = space.size
    best = 0
    for start in space.vertices:
        # iterative DFS over simple paths
        stack = [(start, 1 << start, 0, iter(adj[start]))]
        while stack:
            s, seen, depth, it = stack[-1]
            if depth > best:
                best = depth
                if best == n - 1:
                    return best
            for t in it:
                if not seen >> t & 1:
                    stack.append((t, seen | 1 << t, depth + 1, iter(adj[t])))
                    break
            else:
                stack.pop()
    return best


def _sccs(adj: Sequence[Sequence[int]]) -> list[list[int]]:
    """Strongly connected components (iterative Tarjan), reverse topological order."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for k in range(i, len(adj[v])):
                w = adj[v][k]
                if index[w] == -1:
                    work.append((v, k + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def traversal_diameter(sys: FactoredSystem, cap: int = STATE_SPACE_CAP) -> int:
    """One less than the most states any single walk can traverse.

    A walk can visit every state of each strongly connected component it
    enters, so the answer is the heaviest path in the component DAG, weighting
    components by their size.
    """
    space = build_state_space(sys, cap)
    adj = [sorted(space.neighbours(s)) for s in space.vertices]
    comps = _sccs(adj)
    comp_of = [0] * space.size
    for c, members in enumerate(comps):
        for s in members:
            comp_of[s] = c
    # Tarjan emits sinks first, so successors are finalised before predecessors.
    heaviest = [0] * len(comps)
    for c, members in enumerate(comps):
        down = 0
        for s in members:
            for t in adj[s]:
                d = comp_of[t]
                if d != c:
                    down = max(down, heaviest[d])
        heaviest[c] = len(members) + down
    return max(heaviest) - 1


def sublist_diameter(sys: FactoredSystem, cap: int = SUBLIST_CAP) -> int:
    """Worst case, over start states and action sequences, of the shortest
    order-preserving subsequence reaching the same end state.

    Reading a sequence left to right, we track ``(cur, best)`` where ``cur`` is
    the state reached so far and ``best`` maps every state reachable by some
    sublist of the prefix to the length of the shortest such sublist.
    Appending action ``a`` maps ``best`` to ``best | {a(y): best[y] + 1}``
    (keeping minima). Minimal sublists never repeat a state, so lengths are
    bounded and the set of reachable ``(cur, best)`` pairs is finite; we
    explore it to saturation.
    """
    _check_cap("sublist diameter", sys, cap)
    space = build_state_space(sys, cap)
    nact = len(space.actions)
    if nact == 0:
        return 0
    succ = space.succ
    n = space.size
    worst = 0
    for start in space.vertices:
        init = (start, _pack({start: 0}, n))
        seen = {init}
        queue = deque([init])
        while queue:
            cur, packed = queue.popleft()
            best = _unpack(packed)
            if best[cur] > worst:
                worst = best[cur]
            for j in range(nact):
                nxt = dict(best)
                for y, d in best.items():
                    z = succ[y][j]
                    if z not in nxt or nxt[z] > d + 1:
                        nxt[z] = d + 1
                key = (succ[cur][j], _pack(nxt, n))
                if key not in seen:
                    seen.add(key)
                    queue.append(key)
    return worst


def _pack(best: dict[int, int], n: int) -> tuple[int, ...]:
    return tuple(best.get(s, -1) for s in range(n))


def _unpack(packed: tuple[int, ...]) -> dict[int, int]:
    return {s: d for s, d in enumerate(packed) if d >= 0}


def subset_diameter(sys: FactoredSystem, cap: int = SUBLIST_CAP) -> int:
    """Worst case, over start states and action sequences, of the shortest
    sequence drawn from the sequence's own action set (any order, repetition
    allowed) reaching the same end state.

    For each start we enumerate reachable ``(end state, set of actions used)``
    pairs, then measure the shortest path to the end state using only the
    used actions.
    """
    _check_cap("subset diameter", sys, cap)
    space = build_state_space(sys, cap)
    nact = len(space.actions)
    worst = 0
    dist_cache: dict[tuple[int, int], dict[int, int]] = {}
    for start in space.vertices:
        seen = {(start, 0)}
        queue = deque(seen)
        while queue:
            cur, used = queue.popleft()
            for j in range(nact):
                key = (space.succ[cur][j], used | 1 << j)
                if key not in seen:
                    seen.add(key)
                    queue.append(key)
        for cur, used in seen:
            dists = dist_cache.get((start, used))
            if dists is None:
                allowed = [j for j in range(nact) if used >> j & 1]
                dists = _bfs_distances(space, start, allowed)
                dist_cache[(start, used)] = dists
            worst = max(worst, dists[cur])
    return worst


def trivial_bound(sys: FactoredSystem) -> int:
    return 2 ** len(sys.domain) - 1


@dataclass(frozen=True)
class TopologyReport:
    diameter: int | None
    recurrence_diameter: int | None
    traversal_diameter: int | None
    sublist_diameter: int | None
    subset_diameter: int | None
    trivial_bound: int
    refused: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "diameter": self.diameter,
            "recurrence_diameter": self.recurrence_diameter,
            "traversal_diameter": self.traversal_diameter,
            "sublist_diameter": self.sublist_diameter,
            "subset_diameter": self.subset_diameter,
            "trivial_bound": self.trivial_bound,
            "refused": list(self.refused),
        }

    def chain_holds(self) -> bool:
        """Whether d <= S <= l <= rd <= td <= 2^n - 1 holds for computed values."""
        chain = [self.diameter, self.subset_diameter, self.sublist_diameter,
                 self.recurrence_diameter, self.traversal_diameter, self.trivial_bound]
        known = [v for v in chain if v is not None]
        return all(a <= b for a, b in zip(known, known[1:]))


METRICS = {
    "diameter": (diameter, STATE_SPACE_CAP),
    "recurrence_diameter": (recurrence_diameter, RECURRENCE_CAP),
    "traversal_diameter": (traversal_diameter, STATE_SPACE_CAP),
    "sublist_diameter": (sublist_diameter, SUBLIST_CAP),
    "subset_diameter": (subset_diameter, SUBLIST_CAP),
}


def analyze(sys: FactoredSystem, caps: dict[str, int] | None = None) -> TopologyReport:
    """Compute every metric whose cap permits it; refused metrics are ``None``."""
    caps = caps or {}
    values: dict[str, int | None] = {}
    refused = []
    for name, (fn, default_cap) in METRICS.items():
        try:
            values[name] = fn(sys, cap=caps.get(name, default_cap))
        except CapExceeded as exc:
            log.info("%s", exc)
            values[name] = None
            refused.append(name)
    return TopologyReport(trivial_bound=trivial_bound(sys), refused=tuple(refused), **values)


def completeness_threshold(prob: Problem, current: Plan, bound_mode: str | int = "exact",
                           cap: int = SUBLIST_CAP) -> int:
    """Horizon within which some plan at least as cheap as ``current`` exists.

    ``bound_mode`` picks the fallback used when 0-cost actions are present:
    ``"exact"`` (sublist diameter, falling back to the trivial bound when the
    cap is exceeded), ``"trivial"`` (2^n - 1) or an ``int`` supplied from an
    external bounding tool.
    """
    costs = [prob.cost(a) for a in prob.system.actions]
    if all(c == 1 for c in costs):
        return len(current)
    if all(c != 0 for c in costs):
        return plan_cost(prob.costs, current) // min(costs)
    if isinstance(bound_mode, int) and not isinstance(bound_mode, bool):
        try:
            d = diameter(prob.system)
        except CapExceeded:
            d = None
        if d is not None and bound_mode < d:
            log.warning("supplied bound %d is below the diameter %d", bound_mode, d)
        return bound_mode
    if bound_mode == "trivial":
        return trivial_bound(prob.system)
    if bound_mode == "exact":
        try:
            return sublist_diameter(prob.system, cap=cap)
        except CapExceeded as exc:
            log.warning("%s; using the trivial bound", exc)
            return trivial_bound(prob.system)
    raise ValueError(f"unknown bound mode {bound_mode!r}")
