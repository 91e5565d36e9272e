import pytest

from costsat.anytime import Unsolvable, initial_plan
from costsat.genrand import COST_MODES, GenSpec, gen_problem, gen_system, problem_without, shrink
from costsat.model import validate_problem
from costsat.problemfile import dumps_problem


def test_deterministic_for_seed():
    spec = GenSpec(max_vars=4, max_actions=6, seed=9)
    assert dumps_problem(gen_problem(spec)) == dumps_problem(gen_problem(spec))
    assert gen_system(spec) == gen_system(spec)
    assert dumps_problem(gen_problem(spec)) != dumps_problem(gen_problem(spec.with_seed(10)))


def test_ranges_respected():
    spec = GenSpec(min_vars=2, max_vars=3, min_actions=2, max_actions=4)
    for seed in range(100):
        prob = gen_problem(spec.with_seed(seed))
        assert 2 <= len(prob.system.variables) <= 3
        assert 2 <= len(prob.system) <= 4


@pytest.mark.parametrize("mode", COST_MODES)
def test_always_valid(mode):
    for seed in range(200):
        prob = gen_problem(GenSpec(max_vars=4, max_actions=6, cost_mode=mode, seed=seed))
        assert validate_problem(prob) == []


def test_cost_modes():
    for seed in range(100):
        unit = gen_problem(GenSpec(cost_mode="all-unit", seed=seed))
        assert set(unit.costs.values()) == {1}
        positive = gen_problem(GenSpec(cost_mode="no-zero", seed=seed))
        assert 0 not in positive.costs.values()
    with_zero = [gen_problem(GenSpec(cost_mode="with-zero", zero_density=0.3, seed=s)) for s in range(1000)]
    assert sum(0 in p.costs.values() for p in with_zero) >= 990


def test_solvable_and_unsolvable_populations():
    for seed in range(60):
        assert initial_plan(gen_problem(GenSpec(seed=seed))) is not None
        with pytest.raises(Unsolvable):
            initial_plan(gen_problem(GenSpec(solvable=False, seed=seed)))


def test_bad_spec_rejected():
    with pytest.raises(ValueError):
        GenSpec(cost_mode="free")
    with pytest.raises(ValueError):
        GenSpec(min_vars=3, max_vars=2)


def test_from_dict():
    assert GenSpec.from_dict({"seed": 4, "cost_mode": "all-unit"}) == GenSpec(seed=4, cost_mode="all-unit")


def test_shrink_keeps_failure_and_reduces():
    prob = gen_problem(GenSpec(min_vars=4, max_vars=4, min_actions=6, max_actions=6, seed=2))

    def fails(p):
        return any(a.name == "a3" for a in p.system.actions)

    small = shrink(prob, fails)
    assert fails(small)
    assert [a.name for a in small.system.actions] == ["a3"]
    assert len(small.system.variables) <= len(prob.system.variables)
    assert validate_problem(small) == []


def test_problem_without_drops_cost_entry():
    prob = gen_problem(GenSpec(min_actions=3, max_actions=3, seed=1))
    victim = prob.system.actions[0]
    smaller = problem_without(prob, victim)
    assert victim not in smaller.system and victim not in smaller.costs
