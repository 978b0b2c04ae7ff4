import pytest

from squadplan.mapgraph import RegionGraph
from squadplan.negamax import NegamaxConfig, negamax_plan
from squadplan.world import Moving, RulesError

from conftest import make_state, sq
from oracles import dominance_toy, minimax_root, random_small_instance


def to_p0(value, mover):
    return value if mover == 0 else -value


def test_mirror_leaf_value_zero():
    g = RegionGraph(2, {(0, 1): 5.0})
    s = make_state(g, [sq(0, 0, 2, 0), sq(1, 0, 2, 1)])
    _, value = negamax_plan(s, depth=1)
    assert value == 0


def test_dominance_toy_attacks():
    s = dominance_toy()
    action, value = negamax_plan(s, depth=4)
    assert action.orders[0].target == 1
    assert value > 0
    mover, best, scored = minimax_root(s, 4)
    assert mover == 0 and best == value
    assert [a for a, v in scored if v == best][0] == action


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("depth", [1, 2, 3])
def test_matches_minimax_oracle(seed, depth):
    s = random_small_instance(seed)
    if s.clock >= s.horizon or len({x.owner for x in s.squads}) < 2:
        pytest.skip("terminal instance")
    action, value = negamax_plan(s, depth=depth, cfg=NegamaxConfig(action_cap=16))
    mover, best, scored = minimax_root(s, depth, cap=16)
    assert to_p0(value, mover) == best
    assert action == next(a for a, v in scored if v == best)


@pytest.mark.parametrize("seed", range(8))
def test_alpha_beta_same_answer(seed):
    s = random_small_instance(seed + 100)
    if len({x.owner for x in s.squads}) < 2:
        pytest.skip("terminal instance")
    plain = negamax_plan(s, depth=3, cfg=NegamaxConfig(action_cap=16))
    pruned = negamax_plan(s, depth=3, cfg=NegamaxConfig(action_cap=16, alpha_beta=True))
    assert plain == pruned


@pytest.mark.parametrize("seed", range(8))
def test_role_swap_zero_sum(seed):
    """Swapping owners negates nothing: the mover's value is the same from the mirrored side."""
    s = random_small_instance(seed + 200)
    if len({x.owner for x in s.squads}) < 2:
        pytest.skip("terminal instance")
    swapped = make_state(s.world.graph, [sq(1 - x.owner, x.unit_type, x.count, x.region, hp=x.pool_hp)
                                         for x in s.squads], horizon=s.horizon,
                         hold_duration=s.world.hold_duration)
    cfg = NegamaxConfig(action_cap=16)
    _, v0 = negamax_plan(s, depth=2, cfg=cfg, player=0)
    _, v1 = negamax_plan(swapped, depth=2, cfg=cfg, player=1)
    assert v0 == v1


def test_deterministic():
    s = random_small_instance(7)
    assert negamax_plan(s, depth=2) == negamax_plan(s, depth=2)


def test_errors():
    g = RegionGraph(2, {(0, 1): 5.0})
    with pytest.raises(RulesError):
        negamax_plan(make_state(g, [sq(0, 0, 1, 0)]), depth=2)
    with pytest.raises(ValueError):
        negamax_plan(make_state(g, [sq(0, 0, 1, 0), sq(1, 0, 1, 1)]), depth=0)


def test_same_mover_consecutive_not_negated():
    # p1 is in transit for a long time: p0 decides at consecutive nodes.
    g = RegionGraph(3, {(0, 1): 2.0, (1, 2): 2.0})
    s = make_state(g, [sq(0, 0, 3, 0), sq(1, 0, 1, 2, order=Moving(2, 25.0))], horizon=30.0)
    action, value = negamax_plan(s, depth=2)
    mover, best, _ = minimax_root(s, 2)
    assert mover == 0 and value == best > 0
    assert action.orders[0].target == 1
