"""Small hand-built systems and problems with known topology and optimal costs."""

from __future__ import annotations

from .model import Action, FactoredSystem, Problem, State


def clique_system() -> FactoredSystem:
    """Four precondition-free actions over two variables; the state space is a clique."""
    return FactoredSystem([
        Action.make([], ["v1", "v2"], "p1"),
        Action.make([], ["-v1", "v2"], "p2"),
        Action.make([], ["v1", "-v2"], "p3"),
        Action.make([], ["-v1", "-v2"], "p4"),
    ])


def clique_problem() -> Problem:
    sys = clique_system()
    return Problem(
        sys,
        {a: 1 for a in sys},
        State.from_literals(["-v1", "-v2"]),
        State.from_literals(["v1", "v2"]),
        name="clique",
    )


def detour_system() -> FactoredSystem:
    """A cheap two-step route and an expensive one-step shortcut to the same state."""
    return FactoredSystem([
        Action.make(["-v1", "-v2"], ["v1", "-v2"], "p1"),
        Action.make(["v1", "-v2"], ["-v1", "v2"], "p2"),
        Action.make(["-v1", "-v2"], ["-v1", "v2"], "p3"),
    ])


def detour_problem() -> Problem:
    sys = detour_system()
    costs = {sys.actions[0]: 1, sys.actions[1]: 1, sys.actions[2]: 3}
    return Problem(
        sys,
        costs,
        State.from_literals(["-v1", "-v2"]),
        State.from_literals(["-v1", "v2"]),
        name="detour",
    )


def subset_gap_system() -> FactoredSystem:
    """Sublist diameter 3 but subset diameter 2."""
    return FactoredSystem([
        Action.make([], ["v1", "v3"], "p1"),
        Action.make([], ["-v1", "v2"], "p2"),
        Action.make([], ["v1"], "p3"),
    ])


_HUB = ["-v1", "-v2"]
_LEAVES = (["-v1", "v2"], ["v1", "-v2"], ["v1", "v2"])


def star_out_system() -> FactoredSystem:
    """Directed star: one hub with an edge to each of the other three states."""
    return FactoredSystem([
        Action.make(_HUB, leaf, f"out{k}") for k, leaf in enumerate(_LEAVES, 1)
    ])


def star_bidirectional_system() -> FactoredSystem:
    """Star whose hub and leaves are connected in both directions."""
    out = list(star_out_system().actions)
    back = [Action.make(leaf, _HUB, f"back{k}") for k, leaf in enumerate(_LEAVES, 1)]
    return FactoredSystem(out + back)


def by_name(prob: Problem, *names: str) -> tuple[Action, ...]:
    return tuple(prob.action_by_name(n) for n in names)
