import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costsat import catalog
from costsat.genrand import GenSpec, gen_problem
from costsat.problemfile import (FormatError, dumps_plan, dumps_problem, loads_plan, loads_problem,
                                 problem_to_dict)


def doc(**over):
    base = {
        "variables": ["v1", "v2"],
        "actions": [{"name": "a", "pre": ["-v1"], "eff": ["v1"], "cost": 1}],
        "init": ["-v1", "-v2"],
        "goal": ["v1"],
    }
    base.update(over)
    return json.dumps(base, indent=2)


def test_load_minimal():
    prob = loads_problem(doc())
    assert prob.system.variables == ["v1", "v2"]
    assert [a.name for a in prob.system] == ["a"]
    assert prob.costs[prob.system.actions[0]] == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["all-unit", "no-zero", "with-zero", "mixed"]))
def test_round_trip_idempotent(seed, mode):
    text = dumps_problem(gen_problem(GenSpec(max_vars=4, max_actions=6, cost_mode=mode, seed=seed)))
    assert dumps_problem(loads_problem(text)) == text


def test_round_trip_catalog(detour):
    again = loads_problem(dumps_problem(detour))
    assert problem_to_dict(again) == problem_to_dict(detour)


@pytest.mark.parametrize("over, field", [
    ({"variables": ["v1", "v1"]}, "variables"),
    ({"variables": ["-v1"]}, "variables"),
    ({"init": ["-v1"]}, "init"),
    ({"goal": ["v9"]}, "goal[0]"),
    ({"goal": ["v1", "-v1"]}, "goal"),
    ({"actions": [{"name": "a", "pre": [], "eff": ["v1"], "cost": -1}]}, "actions[0].cost"),
    ({"actions": [{"name": "a", "pre": [], "eff": ["v1"], "cost": True}]}, "actions[0].cost"),
    ({"actions": [{"name": "a", "pre": [], "eff": ["v1"]}]}, "actions[0].cost"),
    ({"actions": [{"name": "a", "pre": ["q"], "eff": ["v1"], "cost": 1}]}, "actions[0].pre[0]"),
    ({"actions": [{"name": "a", "eff": ["v1"], "cost": 1}, {"name": "a", "eff": ["v2"], "cost": 1}]},
     "actions[1].name"),
    ({"actions": [{"name": "a", "eff": ["v1"], "cost": 1, "when": 3}]}, "actions[0]"),
])
def test_field_diagnostics(over, field):
    with pytest.raises(FormatError) as info:
        loads_problem(doc(**over), source="p.json")
    assert info.value.field == field
    assert str(info.value).startswith("p.json")


def test_action_diagnostics_point_at_line():
    text = doc(actions=[{"name": "ok", "eff": ["v1"], "cost": 1}, {"name": "bad", "eff": ["v1"], "cost": -2}])
    with pytest.raises(FormatError) as info:
        loads_problem(text)
    assert '"bad"' in text.splitlines()[info.value.line - 1]


def test_json_syntax_error_has_line():
    with pytest.raises(FormatError) as info:
        loads_problem('{\n  "variables": [\n  oops\n}')
    assert info.value.line == 3


def test_conflicting_costs_rejected():
    acts = [{"name": "a", "eff": ["v1"], "cost": 1}, {"name": "b", "eff": ["v1"], "cost": 2}]
    with pytest.raises(FormatError, match="conflicting-costs"):
        loads_problem(doc(actions=acts))


def test_system_only_mode():
    text = json.dumps({"variables": ["x"], "actions": [{"name": "a", "eff": ["x"], "cost": 1}]})
    with pytest.raises(FormatError):
        loads_problem(text)
    prob = loads_problem(text, require_problem=False)
    assert prob.init == {"x": False} and len(prob.goal) == 0


def test_plans(detour):
    p = catalog.by_name(detour, "p1", "p2")
    assert loads_plan(dumps_plan(p), detour) == p
    assert loads_plan("# comment\np1\n\np2\n", detour) == p
    assert loads_plan("", detour) == ()
    with pytest.raises(FormatError) as info:
        loads_plan("p1\nnope\n", detour)
    assert info.value.line == 2
    with pytest.raises(FormatError):
        loads_plan('["p1", 3]', detour)
