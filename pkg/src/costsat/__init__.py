"""Cost-optimal planning by bounded SAT solving over cost-augmented systems."""

__version__ = "0.1.0"

from .model import (Action, FactoredSystem, Problem, State, execute_sequence, is_solution,
                    plan_cost, validate_problem)
from .topology import analyze, completeness_threshold
from .augment import augment_problem, augment_system, factor_actions, scale_problem
from .encode import decode_plan, emit_dimacs, encode_bounded
from .satsolver import SolverConfig, parse_dimacs, solve
from .anytime import OptimizeConfig, initial_plan, optimize, oracle_optimal_cost, solve_bounded
from .genrand import GenSpec, gen_problem, gen_system

__all__ = [
    "Action", "FactoredSystem", "GenSpec", "OptimizeConfig", "Problem", "SolverConfig", "State",
    "analyze", "augment_problem", "augment_system", "completeness_threshold", "decode_plan",
    "emit_dimacs", "encode_bounded", "execute_sequence", "factor_actions", "gen_problem",
    "gen_system", "initial_plan", "is_solution", "optimize", "oracle_optimal_cost", "parse_dimacs",
    "plan_cost", "scale_problem", "solve", "solve_bounded", "validate_problem",
]
