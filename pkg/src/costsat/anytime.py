"""Any-time cost improvement by repeated bounded-cost SAT solving.

Each round asks for a plan strictly cheaper than the incumbent, at a horizon
that is a completeness threshold for the problem. A SAT answer yields a
cheaper plan; an UNSAT answer certifies the incumbent optimal.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import logging
import time
from dataclasses import asdict, dataclass, field

from .augment import augment_problem, factor_with_origins, scale_problem
from .encode import Cnf, decode_plan, emit_dimacs, encode_bounded
from .model import Plan, Problem, is_solution, plan_cost, validate_problem
from .satsolver import SolverConfig, Status, solve
from .topology import STATE_SPACE_CAP, action_masks, build_state_space, completeness_threshold

log = logging.getLogger(__name__)


class BudgetExhausted(RuntimeError):
    """The solver gave up before reaching a verdict."""

    def __init__(self, reason: str):
        super().__init__(f"solver gave up: {reason}")
        self.reason = reason


class Unsolvable(Exception):
    """Exhaustive search proved that no plan exists."""


class SearchFailed(RuntimeError):
    """Search hit its node limit without a verdict."""


class InvalidPlan(ValueError):
    pass


def cnf_digest(cnf: Cnf) -> str:
    return hashlib.sha256(emit_dimacs(cnf).encode()).hexdigest()


@dataclass
class Attempt:
    cost_bound: int
    horizon: int
    status: str  # SAT, UNSAT, UNKNOWN or TRIVIAL (negative bound, nothing to solve)
    plan: Plan | None = None
    num_vars: int = 0
    num_clauses: int = 0
    num_actions: int = 0
    cnf_sha256: str | None = None
    seconds: float = 0.0
    reason: str | None = None
    verified: bool = True


def build_bounded_encoding(prob: Problem, cost_bound: int, horizon: int, factoring: bool = True,
                           amo: str = "pairwise"):
    """CNF for "a plan of cost <= bound within horizon", with its decode metadata.

    Returns ``(cnf, meta, origin, encoded_problem)``; ``origin`` maps every
    encoded action back to the problem's actions in the form ``decode_plan``
    expects.
    """
    aug = augment_problem(prob, cost_bound)
    target = aug.augmented
    if factoring:
        fsys, groups = factor_with_origins(target.system)
        origin = {a: [(m.pre, aug.origin[m][0]) for m in members] for a, members in groups.items()}
        # costs are carried by the counter, the cost map only has to be total
        target = Problem(fsys, {a: 0 for a in fsys}, target.init, target.goal, target.name)
    else:
        origin = {a: base for a, (base, _) in aug.origin.items()}
    cnf, meta = encode_bounded(target, horizon, amo=amo)
    return cnf, meta, origin, target


def bounded_attempt(prob: Problem, cost_bound: int, horizon: int, solver: SolverConfig | None = None,
                    factoring: bool = True, amo: str = "pairwise",
                    time_limit: float | None = None) -> Attempt:
    """Look for a plan of cost ``<= cost_bound`` and length ``<= horizon``."""
    start = time.monotonic()
    if cost_bound < 0:
        return Attempt(cost_bound, horizon, "TRIVIAL")
    cnf, meta, origin, target = build_bounded_encoding(prob, cost_bound, horizon, factoring, amo)
    result = solve(cnf, solver, time_limit=time_limit)
    att = Attempt(
        cost_bound, horizon, result.status.value,
        num_vars=cnf.num_vars, num_clauses=len(cnf), num_actions=len(target.system),
        cnf_sha256=cnf_digest(cnf), reason=result.reason, verified=result.verified,
    )
    if result.status is Status.SAT:
        plan = decode_plan(result.model, meta, origin)
        if not is_solution(prob, plan) or plan_cost(prob.costs, plan) > cost_bound:
            raise AssertionError(f"decoded plan violates the bound {cost_bound}")
        att.plan = plan
    att.seconds = round(time.monotonic() - start, 6)
    return att


def solve_bounded(prob: Problem, cost_bound: int, horizon: int, solver: SolverConfig | None = None,
                  factoring: bool = True, amo: str = "pairwise",
                  time_limit: float | None = None) -> Plan | None:
    """A verified plan with cost ``<= cost_bound``, or ``None`` when none fits the horizon.

    Raises :class:`BudgetExhausted` if the solver gives up.
    """
    defects = validate_problem(prob)
    if defects:
        raise ValueError("; ".join(map(str, defects)))
    att = bounded_attempt(prob, cost_bound, horizon, solver, factoring, amo, time_limit)
    if att.status == "UNKNOWN":
        raise BudgetExhausted(att.reason or "unknown")
    return att.plan


@dataclass
class OptimizeConfig:
    horizon_source: str | int = "exact"  # "exact", "trivial" or a supplied bound
    solver: SolverConfig = field(default_factory=SolverConfig)
    time_budget: float | None = None
    gcd_scaling: bool = True
    factoring: bool = True
    amo: str = "pairwise"

    def as_dict(self) -> dict:
        d = asdict(self)
        d["solver"] = self.solver.describe()
        d["seed"] = self.solver.seed
        return d


@dataclass
class Iteration:
    cost_bound: int
    horizon: int
    status: str
    plan_cost: int | None
    plan: list[str] | None
    num_vars: int
    num_clauses: int
    num_actions: int
    cnf_sha256: str | None
    seconds: float


@dataclass
class OptimizationLog:
    initial_plan: Plan
    initial_cost: int
    gcd: int
    iterations: list[Iteration] = field(default_factory=list)
    best_plan: Plan = ()
    best_cost: int = 0
    optimal_proven: bool = False
    stop_reason: str = ""
    certificate: dict | None = None

    @property
    def plan_costs(self) -> list[int]:
        """Incumbent costs in the order they were found, initial plan first."""
        return [self.initial_cost] + [it.plan_cost for it in self.iterations if it.plan_cost is not None]

    def as_dict(self) -> dict:
        return {
            "initial_plan": [a.name for a in self.initial_plan],
            "initial_cost": self.initial_cost,
            "gcd": self.gcd,
            "iterations": [asdict(it) for it in self.iterations],
            "final": {
                "best_plan": [a.name for a in self.best_plan],
                "best_cost": self.best_cost,
                "optimal_proven": self.optimal_proven,
                "stop_reason": self.stop_reason,
                "certificate": self.certificate,
            },
        }


def optimize(prob: Problem, initial: Plan, config: OptimizeConfig | None = None) -> OptimizationLog:
    """Improve ``initial`` until the solver proves no cheaper plan exists."""
    config = config or OptimizeConfig()
    initial = tuple(initial)
    defects = validate_problem(prob)
    if defects:
        raise ValueError("; ".join(map(str, defects)))
    if not is_solution(prob, initial):
        raise InvalidPlan("initial plan is not a solution")
    start = time.monotonic()
    scaled, g = scale_problem(prob) if config.gcd_scaling else (prob, 1)
    cost = plan_cost(prob.costs, initial)
    out = OptimizationLog(initial, cost, g, best_plan=initial, best_cost=cost)
    fixed_horizon: list[int] = []

    def horizon_for(plan: Plan) -> int:
        costs = [prob.costs[a] for a in prob.system.actions]
        if costs and 0 in costs:
            # the 0-cost branch does not depend on the plan; compute it once
            if not fixed_horizon:
                fixed_horizon.append(completeness_threshold(prob, plan, config.horizon_source))
            return fixed_horizon[0]
        return completeness_threshold(prob, plan, config.horizon_source)

    best = initial
    while True:
        cost = plan_cost(prob.costs, best)
        bound = (cost - 1) // g
        horizon = horizon_for(best)
        remaining = None
        if config.time_budget is not None:
            remaining = config.time_budget - (time.monotonic() - start)
            if remaining <= 0:
                out.stop_reason = "timeout"
                break
        att = bounded_attempt(scaled, bound, horizon, config.solver, config.factoring,
                              config.amo, remaining)
        found_cost = None if att.plan is None else plan_cost(prob.costs, att.plan)
        out.iterations.append(Iteration(
            bound, horizon, att.status, found_cost,
            None if att.plan is None else [a.name for a in att.plan],
            att.num_vars, att.num_clauses, att.num_actions, att.cnf_sha256, att.seconds,
        ))
        log.info("bound %d horizon %d: %s", bound, horizon, att.status)
        if att.status == "SAT":
            if found_cost >= cost:
                raise AssertionError("solver returned a plan that is not cheaper")
            best = att.plan
            continue
        if att.status in ("UNSAT", "TRIVIAL"):
            out.optimal_proven = True
            out.stop_reason = "optimal"
            out.certificate = {
                "cost_bound": bound, "horizon": horizon, "gcd": g,
                "cnf_sha256": att.cnf_sha256, "verified": att.verified,
            }
        else:
            out.stop_reason = "timeout" if att.reason == "timeout" else "budget"
        break
    out.best_plan = tuple(best)
    out.best_cost = plan_cost(prob.costs, best)
    return out


def _goal_masks(prob: Problem, variables) -> tuple[int, int]:
    pos = {v: k for k, v in enumerate(variables)}
    gm = gv = 0
    for v, b in prob.goal.items_sorted():
        gm |= 1 << pos[v]
        if b:
            gv |= 1 << pos[v]
    return gm, gv


def initial_plan(prob: Problem, strategy: str = "uniform-cost", node_limit: int = 1 << 20) -> Plan:
    """A solution found by explicit search over the implicit state space.

    ``uniform-cost`` returns a cheapest plan; ``greedy`` expands states with
    the fewest unmet goal literals first and may return an expensive plan.
    Raises :class:`Unsolvable` when the reachable space holds no goal state.
    """
    if strategy not in ("uniform-cost", "greedy"):
        raise ValueError(f"unknown strategy {strategy!r}")
    variables = prob.system.variables
    acts = prob.system.actions
    masks = [action_masks(a, variables) for a in acts]
    costs = [prob.cost(a) for a in acts]
    gm, gv = _goal_masks(prob, variables)
    pos = {v: k for k, v in enumerate(variables)}
    s0 = sum(1 << pos[v] for v, b in prob.init.items_sorted() if b)

    def unmet(s: int) -> int:
        return bin((s ^ gv) & gm).count("1")

    tie = itertools.count()
    parent: dict[int, tuple[int, int] | None] = {s0: None}
    best_g = {s0: 0}
    frontier = [((unmet(s0), 0) if strategy == "greedy" else (0,), next(tie), s0)]
    closed = set()
    while frontier:
        _, _, s = heapq.heappop(frontier)
        if s in closed:
            continue
        closed.add(s)
        if s & gm == gv:
            plan = []
            while parent[s] is not None:
                prev, j = parent[s]
                plan.append(acts[j])
                s = prev
            return tuple(reversed(plan))
        if len(closed) > node_limit:
            raise SearchFailed(f"expanded more than {node_limit} states")
        for j, (pm, pv, em, ev) in enumerate(masks):
            if s & pm != pv:
                continue
            t = (s & ~em) | ev
            gt = best_g[s] + costs[j]
            if t in closed:
                continue
            if strategy == "greedy":
                if t in parent:
                    continue
                key = (unmet(t), gt)
            else:
                if t in best_g and best_g[t] <= gt:
                    continue
                key = (gt,)
            best_g[t] = gt
            parent[t] = (s, j)
            heapq.heappush(frontier, (key, next(tie), t))
    raise Unsolvable("goal is unreachable from the initial state")


def oracle_optimal_cost(prob: Problem, cap: int = STATE_SPACE_CAP) -> int | None:
    """Cheapest plan cost by Dijkstra over the explicit state space, or ``None``."""
    space = build_state_space(prob.system, cap)
    gm, gv = _goal_masks(prob, space.variables)
    costs = [prob.cost(a) for a in space.actions]
    src = space.encode(prob.init)
    dist = {src: 0}
    heap = [(0, src)]
    done = set()
    while heap:
        d, s = heapq.heappop(heap)
        if s in done:
            continue
        done.add(s)
        if s & gm == gv:
            return d
        for j, t in enumerate(space.succ[s]):
            nd = d + costs[j]
            if nd < dist.get(t, nd + 1):
                dist[t] = nd
                heapq.heappush(heap, (nd, t))
    return None
