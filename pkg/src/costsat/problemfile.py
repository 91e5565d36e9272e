"""Reading and writing problem and plan files.

A problem file is a JSON object::

    {"name": "detour",
     "variables": ["v1", "v2"],
     "actions": [{"name": "p1", "pre": ["-v1"], "eff": ["v1"], "cost": 1}, ...],
     "init": ["-v1", "-v2"],
     "goal": ["v2"]}

Literals are variable names, negated with a leading ``-``. A plan file is
either a JSON list of action names or one action name per line.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .model import Action, FactoredSystem, Plan, Problem, State, parse_literal, validate_problem


class FormatError(ValueError):
    """Malformed input, located by line and field where possible."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None,
                 source: str | None = None):
        self.message, self.field, self.line, self.source = message, field, line, source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.source or "<input>"
        if self.line is not None:
            where += f":{self.line}"
        if self.field:
            where += f": {self.field}"
        return f"{where}: {self.message}"


def _line_of(text: str, needle: str) -> int | None:
    pos = text.find(needle)
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def _literals(raw: Any, field: str, declared: set[str], fail) -> State:
    if not isinstance(raw, list):
        fail("expected a list of literals", field)
    pairs = {}
    for k, lit in enumerate(raw):
        if not isinstance(lit, str):
            fail("literal must be a string", f"{field}[{k}]")
        try:
            v, b = parse_literal(lit)
        except ValueError as e:
            fail(str(e), f"{field}[{k}]")
        if v not in declared:
            fail(f"undeclared variable {v!r}", f"{field}[{k}]")
        if pairs.get(v, b) != b:
            fail(f"contradictory literals for {v!r}", field)
        pairs[v] = b
    return State(pairs)


def problem_from_dict(doc: Any, text: str = "", source: str | None = None,
                      require_problem: bool = True) -> Problem:
    """Build a problem from parsed JSON, raising :class:`FormatError` on defects.

    With ``require_problem=False`` the ``init`` and ``goal`` fields may be
    omitted (for commands that only look at the system); they default to all
    variables false and the empty goal.
    """
    def fail(message: str, field: str | None = None, needle: str | None = None):
        line = _line_of(text, needle) if needle else None
        if line is None and field:
            line = _line_of(text, '"' + field.split("[")[0].split(".")[0] + '"')
        raise FormatError(message, field, line, source)

    if not isinstance(doc, dict):
        fail("top level must be an object")
    unknown = set(doc) - {"name", "variables", "actions", "init", "goal"}
    if unknown:
        fail(f"unknown fields {sorted(unknown)}")
    variables = doc.get("variables")
    if not isinstance(variables, list) or not all(isinstance(v, str) and v for v in variables):
        fail("expected a list of variable names", "variables")
    bad = [v for v in variables if v.startswith("-")]
    if bad:
        fail(f"variable name may not start with '-': {bad[0]!r}", "variables")
    if len(set(variables)) != len(variables):
        dup = next(v for v in variables if variables.count(v) > 1)
        fail(f"duplicate variable {dup!r}", "variables")
    declared = set(variables)

    raw_actions = doc.get("actions")
    if not isinstance(raw_actions, list):
        fail("expected a list of actions", "actions")
    actions, costs, names = [], {}, set()
    for k, ra in enumerate(raw_actions):
        field = f"actions[{k}]"
        if not isinstance(ra, dict):
            fail("action must be an object", field)
        name = ra.get("name")
        if not isinstance(name, str) or not name:
            fail("missing action name", f"{field}.name")
        needle = json.dumps(name)

        def afail(message, sub, needle=needle):
            fail(message, sub, needle)

        if name in names:
            afail(f"duplicate action name {name!r}", f"{field}.name")
        names.add(name)
        extra = set(ra) - {"name", "pre", "eff", "cost"}
        if extra:
            afail(f"unknown fields {sorted(extra)}", field)
        pre = _literals(ra.get("pre", []), f"{field}.pre", declared, afail)
        eff = _literals(ra.get("eff", []), f"{field}.eff", declared, afail)
        cost = ra.get("cost")
        if isinstance(cost, bool) or not isinstance(cost, int) or cost < 0:
            afail("cost must be a nonnegative integer", f"{field}.cost")
        a = Action(pre, eff, name)
        actions.append(a)
        costs[a] = cost

    if require_problem or "init" in doc:
        init = _literals(doc.get("init"), "init", declared, fail)
        missing = sorted(declared - init.domain)
        if missing:
            fail(f"init does not assign {missing}", "init")
    else:
        init = State({v: False for v in variables})
    if require_problem or "goal" in doc:
        goal = _literals(doc.get("goal"), "goal", declared, fail)
    else:
        goal = State()
    name = doc.get("name", "")
    if not isinstance(name, str):
        fail("name must be a string", "name")
    prob = Problem(FactoredSystem(actions, declared=variables), costs, init, goal, name)
    defects = validate_problem(prob)
    if defects:
        fail("; ".join(map(str, defects)))
    return prob


def loads_problem(text: str, source: str | None = None, require_problem: bool = True) -> Problem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, line=e.lineno, source=source) from None
    return problem_from_dict(doc, text, source, require_problem)


def load_problem(path: str | Path, require_problem: bool = True) -> Problem:
    path = Path(path)
    return loads_problem(path.read_text(), str(path), require_problem)


def problem_to_dict(prob: Problem) -> dict:
    doc = {
        "variables": prob.system.variables,
        "actions": [
            {"name": a.name, "pre": a.pre.literals(), "eff": a.eff.literals(), "cost": prob.costs[a]}
            for a in prob.system.actions
        ],
        "init": prob.init.literals(),
        "goal": prob.goal.literals(),
    }
    if prob.name:
        doc = {"name": prob.name, **doc}
    return doc


def dumps_problem(prob: Problem) -> str:
    return json.dumps(problem_to_dict(prob), indent=2) + "\n"


def loads_plan(text: str, prob: Problem, source: str | None = None) -> Plan:
    """Resolve a plan given as a JSON list or as one action name per line.

    Blank lines and lines starting with ``#`` or ``;`` are ignored.
    """
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            names = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise FormatError(e.msg, line=e.lineno, source=source) from None
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise FormatError("plan must be a list of action names", source=source)
        located = [(n, _line_of(text, json.dumps(n))) for n in names]
    else:
        located = [
            (line.strip(), k)
            for k, line in enumerate(text.splitlines(), 1)
            if line.strip() and not line.strip().startswith(("#", ";"))
        ]
    plan = []
    for name, line in located:
        try:
            plan.append(prob.action_by_name(name))
        except KeyError:
            raise FormatError(f"unknown action {name!r}", line=line, source=source) from None
    return tuple(plan)


def load_plan(path: str | Path, prob: Problem) -> Plan:
    path = Path(path)
    return loads_plan(path.read_text(), prob, str(path))


def dumps_plan(plan: Plan) -> str:
    return json.dumps([a.name for a in plan]) + "\n"
