import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from squadplan.actions import generate_joint_actions, random_joint_action, squad_options
from squadplan.mapgraph import RegionGraph
from squadplan.world import Moving, RulesError, apply_joint_action

from conftest import make_state, path_graph, sq

INF, TANK, BIRD = 0, 1, 2

STAR = RegionGraph(5, {(0, 1): 1.0, (0, 2): 2.0, (0, 3): 3.0, (0, 4): 4.0, (1, 2): 1.0, (3, 4): 1.0})


def test_single_squad_two_neighbors():
    s = make_state(path_graph([1, 1]), [sq(0, INF, 1, 1), sq(1, INF, 1, 0)])
    acts = generate_joint_actions(s, 0, cap=128)
    assert [a.orders[0].target for a in acts] == [None, 0, 2]


def test_two_squads_product():
    g = path_graph([1, 1, 1, 1])
    s = make_state(g, [sq(0, INF, 1, 1), sq(0, TANK, 1, 3), sq(1, INF, 1, 0)])
    acts = generate_joint_actions(s, 0, cap=128)
    expected = list(itertools.product([None, 0, 2], [None, 2, 4]))
    assert [tuple(o.target for o in a.orders) for a in acts] == expected


def five_squads():
    # regions 0..3 form a clique, so every squad has Hold + 3 moves; types differ so nothing merges
    g = RegionGraph(6, {(0, 1): 1.0, (0, 2): 1.0, (0, 3): 1.0, (1, 2): 1.0, (1, 3): 1.0, (2, 3): 1.0,
                        (4, 5): 1.0})
    squads = [sq(0, t, 1, r) for t, r in [(INF, 0), (TANK, 0), (INF, 1), (TANK, 1), (INF, 2)]]
    return make_state(g, squads + [sq(1, INF, 1, 5)])


def test_capped_sample():
    s = five_squads()
    sizes = [len(squad_options(s.world, s.squads[r])) for r in s.idle_refs(0)]
    assert sizes == [4] * 5 and math.prod(sizes) == 1024
    acts = generate_joint_actions(s, 0, cap=100, rng_seed=3)
    keys = [tuple(o.target for o in a.orders) for a in acts]
    assert len(acts) == 100 and len(set(keys)) == 100
    assert acts[0].is_all_hold
    assert acts == generate_joint_actions(s, 0, cap=100, rng_seed=3)
    assert acts != generate_joint_actions(s, 0, cap=100, rng_seed=4)


def test_flyer_options_k_nearest():
    pos = tuple((float(i), 0.0) for i in range(6))
    g = RegionGraph(6, {}, pos)
    s = make_state(g, [sq(0, BIRD, 1, 2), sq(1, INF, 1, 0)])
    assert squad_options(s.world, s.squads[0], flyer_k=3) == [None, 1, 3, 0]


def test_no_idle_squads():
    s = make_state(path_graph([1]), [sq(0, INF, 1, 0, order=Moving(1, 3.0)), sq(1, INF, 1, 1)])
    with pytest.raises(RulesError):
        generate_joint_actions(s, 0)


@st.composite
def action_states(draw):
    n = draw(st.integers(2, 6))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1))
    pos = tuple((draw(st.floats(0, 50)), draw(st.floats(0, 50))) for _ in range(n))
    g = RegionGraph(n, {e: 1.0 + i for i, e in enumerate(edges)}, pos)
    squads = [sq(0, draw(st.sampled_from([INF, TANK, BIRD])), 1, draw(st.integers(0, n - 1)))
              for _ in range(draw(st.integers(1, 4)))]
    return make_state(g, squads + [sq(1, INF, 1, 0, order=Moving(0, 50.0))])


@settings(max_examples=100, deadline=None)
@given(action_states(), st.integers(1, 40), st.integers(0, 99), st.integers(1, 4))
def test_generated_actions_valid(s, cap, seed, k):
    acts = generate_joint_actions(s, 0, cap, seed, k)
    refs = s.idle_refs(0)
    total = math.prod(len(squad_options(s.world, s.squads[r], k)) for r in refs)
    assert len(acts) == min(cap, total)
    assert len({tuple(o.target for o in a.orders) for a in acts}) == len(acts)
    assert acts[0].is_all_hold
    for a in acts:
        assert sorted(o.squad_ref for o in a.orders) == refs
        apply_joint_action(s, 0, a)
    assert acts == generate_joint_actions(s, 0, cap, seed, k)


@settings(max_examples=50, deadline=None)
@given(action_states(), st.randoms(use_true_random=False))
def test_random_action_valid(s, rnd):
    apply_joint_action(s, 0, random_joint_action(s, 0, rnd))
