from __future__ import annotations

import pytest

from squadplan.mapgraph import RegionGraph
from squadplan.world import Squad, UnitType, UnitTypeCatalog, World, new_state

INF = UnitType("inf", max_hp=20.0, dps_ground=5.0, dps_air=5.0, is_flyer=False, speed=2.0, destroy_score=100.0)
TANK = UnitType("tank", max_hp=30.0, dps_ground=4.0, dps_air=0.0, is_flyer=False, speed=1.0, destroy_score=150.0)
BIRD = UnitType("bird", max_hp=25.0, dps_ground=10.0, dps_air=0.0, is_flyer=True, speed=5.0, destroy_score=120.0)
CATALOG = UnitTypeCatalog([INF, TANK, BIRD])


def path_graph(lengths, positions=None) -> RegionGraph:
    """0 - 1 - 2 - ... with the given edge lengths."""
    return RegionGraph(len(lengths) + 1, {(i, i + 1): float(l) for i, l in enumerate(lengths)}, positions)


def make_state(graph, squads, horizon=100.0, clock=0.0, catalog=CATALOG, **world_kw):
    world = World(graph, catalog, **world_kw)
    return new_state(world, squads, horizon, clock)


def sq(owner, utype, count, region, hp=None, order=None, catalog=CATALOG):
    if hp is None:
        hp = count * catalog[utype].max_hp
    return Squad(owner, utype, count, float(hp), region, order)


@pytest.fixture
def line3():
    return path_graph([10, 5])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
