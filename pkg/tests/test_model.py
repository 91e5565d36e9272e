import pytest
from hypothesis import given
from hypothesis import strategies as st

from costsat import catalog
from costsat.model import (Action, FactoredSystem, MissingCostError, Problem, State, execute_action,
                           execute_sequence, is_solution, plan_cost, state_union, trajectory,
                           unmet_goals, validate_problem)
from strategies import actions, full_states, partial_states, systems


def S(*lits):
    return State.from_literals(lits)


def test_state_union_left_precedence():
    assert state_union(S("a"), S("-a", "b")) == S("a", "b")
    assert state_union(S(), S("b")) == S("b")
    assert state_union(S("v1", "-v2"), S("-v1", "-v2", "u1")) == S("v1", "-v2", "u1")


def test_state_is_hashable_mapping():
    x = S("a", "-b")
    assert x["a"] is True and x["b"] is False
    assert x == {"a": True, "b": False}
    assert len({x, S("-b", "a")}) == 1
    assert x.literals() == ["a", "-b"]


def test_contradictory_literals_rejected():
    with pytest.raises(ValueError):
        S("a", "-a")


def test_execute_action_examples(detour):
    p1 = detour.action_by_name("p1")
    assert execute_action(S("-v1", "-v2"), p1) == S("v1", "-v2")
    assert execute_action(S("v1", "v2"), p1) == S("v1", "v2")
    assert execute_action(S("-v1", "-v2"), Action.make([], ["v1", "v2"])) == S("v1", "v2")


def test_precondition_outside_state_is_unsatisfied():
    a = Action.make(["c"], ["a"])
    assert execute_action(S("-a"), a) == S("-a")


def test_execute_sequence_examples(clique):
    p1, p2 = catalog.by_name(clique, "p1", "p2")
    assert execute_sequence(S("-v1", "-v2"), [p2, p1]) == S("v1", "v2")
    assert execute_sequence(S("-v1"), []) == S("-v1")
    sub = catalog.subset_gap_system()
    a1, a2, a3 = sub.actions
    assert execute_sequence(S("-v1", "-v2", "-v3"), [a1, a2, a3]) == S("v1", "v2", "v3")


def test_plan_cost_examples(clique, detour):
    p1, p2 = catalog.by_name(clique, "p1", "p2")
    assert plan_cost(clique.costs, [p2, p1]) == 2
    assert plan_cost(clique.costs, []) == 0
    assert plan_cost(detour.costs, catalog.by_name(detour, "p3")) == 3
    with pytest.raises(MissingCostError):
        plan_cost({}, [p1])


def test_is_solution_examples(clique, detour):
    assert is_solution(clique, catalog.by_name(clique, "p1"))
    assert not is_solution(clique, ())
    assert unmet_goals(clique, ()) == ["v1", "v2"]
    assert is_solution(detour, catalog.by_name(detour, "p1", "p2"))
    stranger = Action.make([], ["v1", "v2"], "stranger")
    assert not is_solution(clique, (stranger,))


def test_trajectory_includes_start(detour):
    p1, p2 = catalog.by_name(detour, "p1", "p2")
    assert trajectory(detour.init, [p1, p2]) == [S("-v1", "-v2"), S("v1", "-v2"), S("-v1", "v2")]


def test_validate_problem_defects(clique):
    assert validate_problem(clique) == []
    no_v2 = Problem(clique.system, clique.costs, S("-v1"), clique.goal)
    assert [d.kind for d in validate_problem(no_v2)] == ["invalid-init"]
    partial = Problem(clique.system, dict(list(clique.costs.items())[1:]), clique.init, clique.goal)
    assert [d.kind for d in validate_problem(partial)] == ["partial-cost-map"]
    bad_goal = Problem(clique.system, clique.costs, clique.init, S("zz"))
    assert [d.kind for d in validate_problem(bad_goal)] == ["invalid-goal"]


def test_structural_duplicates_must_share_cost():
    a = Action.make([], ["x"], "a")
    b = Action.make([], ["x"], "b")
    sys_ = FactoredSystem([a, b])
    init = S("-x")
    assert validate_problem(Problem(sys_, {a: 1, b: 1}, init, S("x"))) == []
    kinds = [d.kind for d in validate_problem(Problem(sys_, {a: 1, b: 2}, init, S("x")))]
    assert kinds == ["conflicting-costs"]


def test_system_domain_and_order():
    sys_ = FactoredSystem([Action.make(["b"], ["c"], "z"), Action.make([], ["a"], "y")], declared=["d"])
    assert sys_.variables == ["a", "b", "c", "d"]
    assert [a.name for a in sys_] == ["y", "z"]


@given(partial_states(), partial_states())
def test_union_precedence_property(x1, x2):
    u = state_union(x1, x2)
    assert u.domain == x1.domain | x2.domain
    assert all(u[v] == x1[v] for v in x1)


@given(full_states(), actions())
def test_noop_law_and_validity(x, a):
    y = execute_action(x, a)
    if not a.pre.issubset(x):
        assert y == x
    assert y.domain == x.domain


@given(full_states(), st.lists(actions(), max_size=4), st.lists(actions(), max_size=4))
def test_fold_decomposition(x, p, q):
    assert execute_sequence(x, p + q) == execute_sequence(execute_sequence(x, p), q)


@given(systems(), st.data())
def test_plan_cost_additive(sys_, data):
    if not sys_.actions:
        return
    costs = {a: data.draw(st.integers(0, 5)) for a in sys_}
    p = data.draw(st.lists(st.sampled_from(sys_.actions), max_size=4))
    q = data.draw(st.lists(st.sampled_from(sys_.actions), max_size=4))
    assert plan_cost(costs, p + q) == plan_cost(costs, p) + plan_cost(costs, q)
