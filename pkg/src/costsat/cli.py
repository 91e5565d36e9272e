"""Command-line entry point: ``costsat <command> ...``.

Exit codes for ``optimize``: 0 optimal proven, 1 improved, 2 unchanged,
3 unsolvable, 4 usage or input error, 5 internal error. Other commands use
0 for success and 4/5 for errors; ``validate`` exits 1 for an invalid plan
and ``solve`` exits 1 when no plan fits the bound and 2 when the solver gave up.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .anytime import (BudgetExhausted, InvalidPlan, OptimizeConfig, SearchFailed, Unsolvable,
                      build_bounded_encoding, initial_plan, optimize, solve_bounded)
from .encode import emit_dimacs
from .genrand import COST_MODES, GenSpec, gen_problem
from .model import is_solution, plan_cost, unmet_goals
from .problemfile import FormatError, dumps_plan, dumps_problem, load_plan, load_problem
from .satsolver import SolverConfig
from .topology import STATE_SPACE_CAP, analyze

EXIT_OPTIMAL, EXIT_IMPROVED, EXIT_UNCHANGED, EXIT_UNSOLVABLE, EXIT_USAGE, EXIT_INTERNAL = range(6)

log = logging.getLogger("costsat")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _horizon_source(text: str):
    if text in ("exact", "trivial"):
        return text
    if text.startswith("supplied="):
        try:
            n = int(text.split("=", 1)[1])
        except ValueError:
            n = -1
        if n >= 0:
            return n
    raise argparse.ArgumentTypeError("expected exact, trivial or supplied=N")


def _solver(text: str) -> SolverConfig:
    if text == "embedded":
        return SolverConfig()
    if text == "external":
        return SolverConfig(kind="external")
    if text.startswith("external="):
        return SolverConfig(kind="external", command=text.split("=", 1)[1])
    raise argparse.ArgumentTypeError("expected embedded, external or external=CMD")


def _nonneg_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        n = -1
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return n


def _nonneg_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        x = -1.0
    if not x >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return x


def _solver_config(args) -> SolverConfig:
    return replace(args.solver, seed=args.seed)


def _file_identity(path: str) -> dict:
    data = Path(path).read_bytes()
    return {"path": str(path), "sha256": hashlib.sha256(data).hexdigest()}


def _write_report(args, command: str, config: dict, result: dict, classification: str,
                  started: float) -> None:
    if not getattr(args, "report", None):
        return
    report = {
        "version": __version__,
        "command": command,
        "argv": args.argv,
        "problem": _file_identity(args.problem),
        "config": config,
        "seed": args.seed,
        "classification": classification,
        "result": result,
        "timings": {"total_seconds": round(time.monotonic() - started, 6)},
    }
    Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def cmd_analyze(args) -> int:
    started = time.monotonic()
    prob = load_problem(args.problem, require_problem=False)
    caps = {}
    if args.cap is not None:
        caps = {name: args.cap for name in
                ("diameter", "recurrence_diameter", "traversal_diameter", "sublist_diameter", "subset_diameter")}
    report = analyze(prob.system, caps)
    print(f"variables: {len(prob.system.variables)}")
    print(f"actions: {len(prob.system)}")
    for name, value in report.as_dict().items():
        if name == "refused":
            continue
        print(f"{name}: {'refused (cap exceeded)' if value is None else value}")
    if report.refused:
        print(f"completeness bound: {report.trivial_bound} (trivial)")
    _write_report(args, "analyze", {"caps": caps}, report.as_dict(),
                  "refused" if report.refused else "complete", started)
    return 0


def cmd_validate(args) -> int:
    prob = load_problem(args.problem)
    plan = load_plan(args.plan, prob)
    ok = is_solution(prob, plan)
    print(f"solution: {'yes' if ok else 'no'}")
    print(f"cost: {plan_cost(prob.costs, plan)}")
    print(f"length: {len(plan)}")
    for lit in unmet_goals(prob, plan):
        print(f"unmet goal: {lit}")
    return 0 if ok else 1


def cmd_encode(args) -> int:
    prob = load_problem(args.problem)
    cnf, meta, origin, target = build_bounded_encoding(
        prob, args.bound, args.horizon, factoring=not args.no_factoring, amo=args.amo)
    out = Path(args.output)
    out.write_text(emit_dimacs(cnf))
    decode = {}
    for a, o in origin.items():
        cands = [(None, o)] if not isinstance(o, list) else o
        decode[a.name] = [
            {"guard": None if g is None else g.literals(), "action": base.name} for g, base in cands
        ]
    extra = {
        "problem": _file_identity(args.problem),
        "cost_bound": args.bound,
        "factoring": not args.no_factoring,
        "amo": args.amo,
        "num_clauses": len(cnf),
        "counter_vars": sorted(set(target.system.variables) - set(prob.system.variables)),
        "decode": decode,
    }
    sidecar = out.with_name(out.name + ".json")
    sidecar.write_text(meta.to_json(extra))
    print(f"wrote {out} ({cnf.num_vars} variables, {len(cnf)} clauses) and {sidecar}")
    return 0


def cmd_solve(args) -> int:
    prob = load_problem(args.problem)
    try:
        plan = solve_bounded(prob, args.bound, args.horizon, _solver_config(args),
                             factoring=not args.no_factoring, time_limit=args.time_budget)
    except BudgetExhausted as exc:
        print(f"unknown: {exc.reason}")
        return 2
    if plan is None:
        print(f"no plan with cost <= {args.bound} within {args.horizon} steps")
        return 1
    print(f"cost: {plan_cost(prob.costs, plan)}")
    sys.stdout.write(dumps_plan(plan))
    return 0


def cmd_optimize(args) -> int:
    started = time.monotonic()
    prob = load_problem(args.problem)
    config = OptimizeConfig(
        horizon_source=args.horizon_source,
        solver=_solver_config(args),
        time_budget=args.time_budget,
        gcd_scaling=not args.no_gcd_scaling,
        factoring=not args.no_factoring,
    )
    if args.initial:
        initial = load_plan(args.initial, prob)
        if not is_solution(prob, initial):
            raise InvalidPlan(f"{args.initial}: initial plan is not a solution "
                              f"(unmet: {', '.join(unmet_goals(prob, initial))})")
    else:
        try:
            initial = initial_plan(prob, args.initial_strategy)
        except Unsolvable as exc:
            print(f"unsolvable: {exc}")
            _write_report(args, "optimize", config.as_dict(), {"unsolvable": True}, "unsolvable", started)
            return EXIT_UNSOLVABLE
    result = optimize(prob, initial, config)
    if result.optimal_proven:
        code, classification = EXIT_OPTIMAL, "optimal"
    elif result.best_cost < result.initial_cost:
        code, classification = EXIT_IMPROVED, "improved"
    else:
        code, classification = EXIT_UNCHANGED, "unchanged"
    for it in result.iterations:
        found = "" if it.plan_cost is None else f" -> cost {it.plan_cost}"
        print(f"bound {it.cost_bound} horizon {it.horizon}: {it.status}{found}")
    print(f"initial cost: {result.initial_cost}")
    print(f"best cost: {result.best_cost}")
    print(f"optimal proven: {'yes' if result.optimal_proven else 'no'}")
    print(f"stop reason: {result.stop_reason}")
    print("plan: " + dumps_plan(result.best_plan), end="")
    if args.plot:
        from .plotting import cost_trace
        cost_trace(result.plan_costs, args.plot, result.optimal_proven)
    _write_report(args, "optimize", config.as_dict(), result.as_dict(), classification, started)
    return code


def _report_row(path: str) -> dict:
    doc = json.loads(Path(path).read_text())
    result = doc.get("result") or {}
    final = result.get("final") or {}
    missing = [f for f, v in (("result.initial_cost", result.get("initial_cost")),
                              ("result.final.best_cost", final.get("best_cost")),
                              ("result.final.optimal_proven", final.get("optimal_proven")))
               if v is None]
    if missing:
        raise FormatError(f"missing {', '.join(missing)}", source=path)
    instance = Path((doc.get("problem") or {}).get("path", path)).stem
    return {"instance": instance, "initial_cost": result["initial_cost"],
            "final_cost": final["best_cost"], "optimal_proven": bool(final["optimal_proven"])}


def cmd_compare_costs(args) -> int:
    rows, bad = [], 0
    for path in args.reports:
        try:
            rows.append(_report_row(path))
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            bad += 1
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=args.delimiter, lineterminator="\n")
    writer.writerow(["instance", "initial_cost", "final_cost", "optimal_proven"])
    for r in rows:
        writer.writerow([r["instance"], r["initial_cost"], r["final_cost"], str(r["optimal_proven"]).lower()])
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if args.plot:
        from .plotting import cost_scatter
        cost_scatter(rows, args.plot)
    return EXIT_USAGE if bad else 0


def cmd_generate(args) -> int:
    fields = json.loads(Path(args.spec).read_text()) if args.spec else {}
    for name in ("min_vars", "max_vars", "min_actions", "max_actions", "cost_mode", "max_cost",
                 "zero_density", "seed"):
        value = getattr(args, name)
        if value is not None:
            fields[name] = value
    if args.unsolvable:
        fields["solvable"] = False
    try:
        spec = GenSpec.from_dict(fields)
    except TypeError as exc:
        raise FormatError(str(exc), source=args.spec) from None
    if args.count == 1 and not args.out_dir:
        sys.stdout.write(dumps_problem(gen_problem(spec)))
        return 0
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        prob = gen_problem(spec.with_seed(spec.seed + k))
        path = out_dir / f"{prob.name}.json"
        path.write_text(dumps_problem(prob))
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="costsat", description="Cost-optimal planning via bounded SAT solving.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver rounds to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, solver=True):
        p.add_argument("--seed", type=int, default=0, help="solver seed, recorded in reports")
        if solver:
            p.add_argument("--solver", type=_solver, default=SolverConfig(),
                           help="embedded, external or external=CMD (default embedded)")
            p.add_argument("--time-budget", type=_nonneg_float, default=None, metavar="SECONDS")
            p.add_argument("--no-factoring", action="store_true")

    p = sub.add_parser("analyze", help="topological properties of the state space")
    p.add_argument("problem")
    p.add_argument("--cap", type=_nonneg_int, help=f"variable cap for every metric (default per metric, <= {STATE_SPACE_CAP})")
    p.add_argument("--report", help="write a JSON run report here")
    common(p, solver=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="check a plan against a problem")
    p.add_argument("problem")
    p.add_argument("plan")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("encode", help="write the bounded-cost CNF and its decode metadata")
    p.add_argument("problem")
    p.add_argument("--bound", type=_nonneg_int, required=True)
    p.add_argument("--horizon", type=_nonneg_int, required=True)
    p.add_argument("-o", "--output", required=True, help="DIMACS path; metadata goes to PATH.json")
    p.add_argument("--amo", choices=("pairwise", "sequential"), default="pairwise")
    p.add_argument("--no-factoring", action="store_true")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", help="find a plan within a cost bound and horizon")
    p.add_argument("problem")
    p.add_argument("--bound", type=_nonneg_int, required=True)
    p.add_argument("--horizon", type=_nonneg_int, required=True)
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("optimize", help="improve a plan until optimality is proven")
    p.add_argument("problem")
    p.add_argument("--initial", help="initial plan file (default: search)")
    p.add_argument("--initial-strategy", choices=("greedy", "uniform-cost"), default="greedy")
    p.add_argument("--horizon-source", type=_horizon_source, default="exact",
                   help="exact, trivial or supplied=N (used when 0-cost actions exist)")
    p.add_argument("--no-gcd-scaling", action="store_true")
    p.add_argument("--report", help="write a JSON run report here")
    p.add_argument("--plot", help="write a PNG of the cost trace here")
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compare-costs", help="tabulate initial and final costs from reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--delimiter", default=",")
    p.add_argument("-o", "--output", help="table path (default stdout)")
    p.add_argument("--plot", help="write a PNG scatter of initial vs final cost here")
    p.set_defaults(func=cmd_compare_costs)

    p = sub.add_parser("generate", help="write random problems")
    p.add_argument("--spec", help="JSON file of generator settings")
    p.add_argument("--count", type=_nonneg_int, default=1)
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--min-vars", type=int)
    p.add_argument("--max-vars", type=int)
    p.add_argument("--min-actions", type=int)
    p.add_argument("--max-actions", type=int)
    p.add_argument("--cost-mode", choices=COST_MODES)
    p.add_argument("--max-cost", type=int)
    p.add_argument("--zero-density", type=float)
    p.add_argument("--unsolvable", action="store_true")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return exc.code or 0
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FormatError, InvalidPlan, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExhausted, SearchFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
