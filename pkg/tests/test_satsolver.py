import random
import shlex
import sys

import pytest

import oracles
from costsat.encode import Cnf
from costsat.satsolver import (SOLVER_ENV, Budget, CDCLSolver, Model, ParseError, SolverConfig, Status,
                               check_model, parse_dimacs, solve, solve_cnf, solve_external)


def random_cnf(rng, max_vars=20, k=3):
    n = rng.randint(1, max_vars)
    m = rng.randint(0, int(n * 4.5))
    clauses = [[rng.choice((-1, 1)) * rng.randint(1, n) for _ in range(rng.randint(1, k))] for _ in range(m)]
    return Cnf.from_clauses(clauses, n)


def script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(body)
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(path))}"


def test_small_examples():
    assert solve_cnf(Cnf.from_clauses([[1], [-1]])).status is Status.UNSAT
    res = solve_cnf(Cnf.from_clauses([[1, 2], [-1]]))
    assert res.sat and res.model[2] and not res.model[1]
    assert solve_cnf(Cnf(0, ())).sat
    assert solve_cnf(Cnf(3, ((),))).unsat


def test_check_model():
    assert check_model(Cnf(0, ()), Model([]))
    assert not check_model(Cnf.from_clauses([[1]]), Model([False]))
    with pytest.raises(ValueError):
        check_model(Cnf.from_clauses([[1, 2]]), Model([True]))


def test_model_literals():
    m = Model.from_literals([1, -2, 3], 4)
    assert m.literals() == [1, -2, 3, -4]
    with pytest.raises(IndexError):
        m[0]


def test_parse_dimacs():
    cnf = parse_dimacs("c hello\np cnf 2 1\n1 -2 0\n")
    assert cnf.num_vars == 2 and cnf.clauses == ((1, -2),)
    assert parse_dimacs("p cnf 3 2\n1 2\n 3 0 -1 0\n").clauses == ((1, 2, 3), (-1,))
    assert parse_dimacs("p cnf 1 1\n1 0\n%\n0\n").clauses == ((1,),)


@pytest.mark.parametrize("text, line", [
    ("p cnf 2\n1 0\n", 1),
    ("p cnf 2 1\n1 x 0\n", 2),
    ("p cnf 2 1\n\n3 0\n", 3),
    ("1 0\np cnf 1 1\n", 1),
    ("p cnf 1 1\np cnf 1 1\n1 0\n", 2),
    ("p cnf 1 2\n1 0\n", 0),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_dimacs(text)
    assert info.value.line == line


def test_agrees_with_truth_table():
    rng = random.Random(7)
    for _ in range(150):
        cnf = random_cnf(rng, max_vars=12)
        res = solve_cnf(cnf, seed=rng.randint(0, 9))
        assert res.status is not Status.UNKNOWN
        assert res.sat == oracles.truth_table_sat(cnf.num_vars, cnf.clauses)
        if res.sat:
            assert check_model(cnf, res.model)


def test_learns_through_hard_instance():
    rng = random.Random(3)
    n = 80
    clauses = [[rng.choice((-1, 1)) * v for v in rng.sample(range(1, n + 1), 3)] for _ in range(int(n * 4.3))]
    res = solve_cnf(Cnf.from_clauses(clauses, n))
    assert res.status in (Status.SAT, Status.UNSAT)
    assert res.stats["conflicts"] > 0


def test_pigeonhole_unsat():
    holes = 5
    pigeons = holes + 1

    def var(p, h):
        return p * holes + h + 1

    clauses = [[var(p, h) for h in range(holes)] for p in range(pigeons)]
    for h in range(holes):
        for p in range(pigeons):
            for q in range(p + 1, pigeons):
                clauses.append([-var(p, h), -var(q, h)])
    res = solve_cnf(Cnf.from_clauses(clauses))
    assert res.unsat and res.verified


def test_conflict_budget_gives_unknown():
    rng = random.Random(11)
    n = 150
    clauses = [[rng.choice((-1, 1)) * v for v in rng.sample(range(1, n + 1), 3)] for _ in range(int(n * 4.26))]
    res = solve_cnf(Cnf.from_clauses(clauses, n), Budget(conflict_limit=5))
    assert res.status is Status.UNKNOWN and res.reason == "conflicts"


def test_time_budget_zero_gives_unknown():
    rng = random.Random(12)
    n = 150
    clauses = [[rng.choice((-1, 1)) * v for v in rng.sample(range(1, n + 1), 3)] for _ in range(int(n * 4.26))]
    res = solve_cnf(Cnf.from_clauses(clauses, n), Budget(time_limit=0.0))
    assert res.status is Status.UNKNOWN and res.reason == "timeout"


def test_deterministic_for_fixed_seed():
    rng = random.Random(5)
    for _ in range(20):
        cnf = random_cnf(rng)
        a, b = CDCLSolver(cnf, seed=4).solve(), CDCLSolver(cnf, seed=4).solve()
        assert a.status == b.status and a.model == b.model


def test_external_conforming(external_solver_cmd):
    cfg = SolverConfig(kind="external", command=external_solver_cmd)
    assert solve(Cnf.from_clauses([[1, 2], [-1]]), cfg).sat
    res = solve(Cnf.from_clauses([[1], [-1]]), cfg)
    assert res.unsat and not res.verified


def test_external_wrong_model_is_downgraded(tmp_path):
    liar = script(tmp_path, "liar.py", 'print("s SATISFIABLE"); print("v -1 0")\n')
    res = solve_external(Cnf.from_clauses([[1]]), liar)
    assert res.status is Status.UNKNOWN and res.reason == "external-failure"


def test_external_garbage_and_crash(tmp_path):
    garbage = script(tmp_path, "garbage.py", 'print("s SATISFIABLE"); print("v one 0")\n')
    assert solve_external(Cnf.from_clauses([[1]]), garbage).reason == "external-failure"
    crash = script(tmp_path, "crash.py", "raise SystemExit(3)\n")
    assert solve_external(Cnf.from_clauses([[1]]), crash).reason == "external-failure"
    assert solve_external(Cnf.from_clauses([[1]]), "/nonexistent/solver").reason == "external-failure"


def test_external_timeout(tmp_path):
    slow = script(tmp_path, "slow.py", "import time; time.sleep(10)\n")
    res = solve_external(Cnf.from_clauses([[1]]), slow, Budget(time_limit=0.5))
    assert res.status is Status.UNKNOWN and res.reason == "timeout"


def test_external_command_from_environment(monkeypatch, external_solver_cmd):
    monkeypatch.setenv(SOLVER_ENV, external_solver_cmd)
    assert solve(Cnf.from_clauses([[1]]), SolverConfig(kind="external")).sat
    monkeypatch.delenv(SOLVER_ENV)
    assert solve(Cnf.from_clauses([[1]]), SolverConfig(kind="external")).reason == "external-failure"
