"""Unit catalog, squads, durative orders and event-driven state forwarding.

A squad is a group of same-type units of one player standing in one region.
Its hit points are pooled: ``pool_hp`` is the total left over all members and
``count`` is the number of members still alive. A squad is either Idle
(awaiting an order) or Moving towards a target region with an absolute
arrival time. Holding in place is encoded as Moving to the squad's own
region for ``World.hold_duration`` seconds.

Scenario file format (line oriented, ``#`` starts a comment)::

    horizon <seconds>
    unittype <name> <max_hp> <dps_ground> <dps_air> <flyer:0|1> <speed> <destroy_score>
    squad <player:0|1> <typename> <count> <region_id>
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

from .mapgraph import RegionGraph

PLAYERS = (0, 1)
DEFAULT_HOLD_DURATION = 6.0
DEFAULT_HORIZON = 300.0
DEFAULT_MAX_ROUNDS = 600


class RulesError(ValueError):
    """An operation was applied to a state that does not allow it."""


class ScenarioFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, slots=True)
class UnitType:
    name: str
    max_hp: float
    dps_ground: float
    dps_air: float
    is_flyer: bool
    speed: float
    destroy_score: float

    def __post_init__(self):
        if not self.max_hp > 0 or not self.speed > 0 or not self.destroy_score > 0:
            raise ValueError(f"unit type {self.name!r}: max_hp, speed and destroy_score must be positive")
        if self.dps_ground < 0 or self.dps_air < 0:
            raise ValueError(f"unit type {self.name!r}: negative dps")

    @property
    def is_combat(self) -> bool:
        return self.dps_ground > 0 or self.dps_air > 0


class UnitTypeCatalog(tuple):
    """Ordered, non-empty tuple of unit types with unique names."""

    def __new__(cls, types: Iterable[UnitType]):
        self = super().__new__(cls, types)
        if not self:
            raise ValueError("catalog must not be empty")
        names = [t.name for t in self]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate unit type names in {names}")
        return self

    def index(self, name: str) -> int:  # type: ignore[override]
        for i, t in enumerate(self):
            if t.name == name:
                return i
        raise KeyError(f"unknown unit type {name!r}")


@dataclass(frozen=True, slots=True)
class Moving:
    target: int
    arrival: float


@dataclass(frozen=True, slots=True)
class Squad:
    owner: int
    unit_type: int
    count: int
    pool_hp: float
    region: int
    order: Moving | None = None

    @property
    def is_idle(self) -> bool:
        return self.order is None

    @property
    def is_holding(self) -> bool:
        return self.order is not None and self.order.target == self.region

    @property
    def is_stationary(self) -> bool:
        """Idle or holding: present in its region and able to fight there."""
        return self.order is None or self.order.target == self.region

    def damaged(self, count: int, pool_hp: float) -> Squad:
        return Squad(self.owner, self.unit_type, count, pool_hp, self.region, self.order)


def squad_sort_key(s: Squad):
    o = s.order
    return (s.owner, s.region, s.unit_type, o is not None,
            -1 if o is None else o.target, -1.0 if o is None else o.arrival,
            s.count, s.pool_hp)


@dataclass(frozen=True, eq=False)
class World:
    """Static context shared by every state of one game."""

    graph: RegionGraph
    catalog: UnitTypeCatalog
    hold_duration: float = DEFAULT_HOLD_DURATION
    max_rounds: int = DEFAULT_MAX_ROUNDS
    resolver: Callable | None = None
    hp_weighted_eval: bool = False
    option_cache: dict = field(default_factory=dict, init=False, repr=False)

    def resolve(self, squads: list[Squad]) -> list[Squad]:
        if self.resolver is None:
            from .combat import resolve_combat
            return resolve_combat(squads, self.catalog, self.max_rounds)
        return self.resolver(squads, self.catalog)


@dataclass(frozen=True)
class GameState:
    clock: float
    squads: tuple[Squad, ...]
    horizon: float
    world: World = field(compare=False, repr=False)

    def of(self, player: int) -> list[Squad]:
        return [s for s in self.squads if s.owner == player]

    def idle_refs(self, player: int) -> list[int]:
        return [i for i, s in enumerate(self.squads) if s.owner == player and s.order is None]

    def check_invariants(self) -> None:
        """Raise AssertionError on any violated GameState/Squad invariant."""
        cat, g = self.world.catalog, self.world.graph
        idle_keys = set()
        for s in self.squads:
            t = cat[s.unit_type]
            assert s.owner in PLAYERS, s
            assert s.count >= 1, s
            assert 0 < s.pool_hp <= s.count * t.max_hp + 1e-6, s
            assert 0 <= s.region < g.region_count, s
            if s.order is None:
                key = (s.owner, s.unit_type, s.region)
                assert key not in idle_keys, f"unmerged idle squads {key}"
                idle_keys.add(key)
            else:
                assert s.order.arrival > self.clock, s
                if s.order.target != s.region and not t.is_flyer:
                    assert g.edge_length(s.region, s.order.target) is not None, s


class TerminalReason(str, Enum):
    ELIMINATION = "elimination"
    HORIZON = "horizon"


def terminal_reason(s: GameState) -> TerminalReason | None:
    owners = {sq.owner for sq in s.squads}
    if len(owners) < 2:
        return TerminalReason.ELIMINATION
    if s.clock >= s.horizon:
        return TerminalReason.HORIZON
    return None


def is_terminal(s: GameState) -> bool:
    return terminal_reason(s) is not None


def merge_idle_squads(s: GameState) -> GameState:
    return GameState(s.clock, _merge(s.squads), s.horizon, s.world)


def _merge(squads: Iterable[Squad]) -> tuple[Squad, ...]:
    merged: dict[tuple[int, int, int], Squad] = {}
    rest = []
    for sq in squads:
        if sq.order is not None:
            rest.append(sq)
            continue
        key = (sq.owner, sq.unit_type, sq.region)
        prev = merged.get(key)
        merged[key] = sq if prev is None else prev.damaged(prev.count + sq.count, prev.pool_hp + sq.pool_hp)
    rest.extend(merged.values())
    rest.sort(key=squad_sort_key)
    return tuple(rest)


def _has_idle(s: GameState, player: int) -> bool:
    return any(sq.owner == player and sq.order is None for sq in s.squads)


def both_can_move(s: GameState) -> bool:
    return _has_idle(s, 0) and _has_idle(s, 1)


def player_to_move(s: GameState, last_simult: int) -> int | None:
    """Who decides next. At a simultaneous point, the player other than ``last_simult``."""
    p0, p1 = _has_idle(s, 0), _has_idle(s, 1)
    if p0 and p1:
        return 1 - last_simult
    if p0:
        return 0
    if p1:
        return 1
    return None


def order_duration(world: World, squad: Squad, target: int | None) -> float:
    """Duration of Hold (``target`` None) or Move(target); raises RulesError if illegal."""
    if target is None:
        return world.hold_duration
    utype = world.catalog[squad.unit_type]
    g = world.graph
    if not isinstance(target, int) or not 0 <= target < g.region_count or target == squad.region:
        raise RulesError(f"illegal move target {target!r} for squad in region {squad.region}")
    if utype.is_flyer:
        length = g.air_distance(squad.region, target)
    else:
        length = g.edge_length(squad.region, target)
        if length is None:
            raise RulesError(f"region {target} is not ground-adjacent to {squad.region}")
    return length / utype.speed


def apply_joint_action(s: GameState, p: int, action) -> GameState:
    """Give every Idle squad of ``p`` its order; the clock does not move.

    ``action`` is a JointAction (anything with ``.orders`` of objects with
    ``squad_ref`` and ``target``, target None meaning Hold).
    """
    idle = set(s.idle_refs(p))
    if not idle:
        raise RulesError(f"player {p} has no idle squads")
    squads = list(s.squads)
    seen = set()
    for order in action.orders:
        ref = order.squad_ref
        if ref in seen:
            raise RulesError(f"two orders for squad {ref}")
        seen.add(ref)
        if ref not in idle:
            raise RulesError(f"squad {ref} is not an idle squad of player {p}")
        sq = squads[ref]
        duration = order_duration(s.world, sq, order.target)
        target = sq.region if order.target is None else order.target
        squads[ref] = Squad(sq.owner, sq.unit_type, sq.count, sq.pool_hp, sq.region,
                            Moving(target, s.clock + duration))
    if seen != idle:
        raise RulesError(f"missing orders for idle squads {sorted(idle - seen)}")
    return GameState(s.clock, tuple(squads), s.horizon, s.world)


def _resolve_contested(squads: Sequence[Squad], world: World) -> tuple[Squad, ...]:
    by_region: dict[int, list[Squad]] = {}
    for sq in squads:
        if sq.is_stationary:
            by_region.setdefault(sq.region, []).append(sq)
    contested = [r for r, group in by_region.items() if len({sq.owner for sq in group}) == 2]
    if not contested:
        return tuple(squads)
    out = [sq for sq in squads if not (sq.is_stationary and sq.region in contested)]
    for r in sorted(contested):
        out.extend(world.resolve(by_region[r]))
    out.sort(key=squad_sort_key)
    return tuple(out)


def settle(s: GameState) -> GameState:
    """Merge idle squads and fight out every contested region without moving the clock."""
    squads = _resolve_contested(_merge(s.squads), s.world)
    return GameState(s.clock, squads, s.horizon, s.world)


def forward(s: GameState, rng_seed: int = 0, until: float | None = None) -> GameState:
    """Advance to the next arrival (or the horizon / ``until``, if earlier).

    Arriving squads become Idle at their targets, same-key idle squads are
    merged, and every region holding stationary squads of both players is
    resolved by the world's combat resolver. ``rng_seed`` is reserved for
    stochastic resolvers; the default resolver is deterministic.
    """
    if is_terminal(s):
        raise RulesError("forward called on a terminal state")
    t = s.horizon
    for sq in s.squads:
        if sq.order is None:
            raise RulesError("forward called while orders are pending")
        if sq.order.arrival < t:
            t = sq.order.arrival
    if until is not None and s.clock < until < t:
        t = until
    moved = [Squad(sq.owner, sq.unit_type, sq.count, sq.pool_hp, sq.order.target)
             if sq.order.arrival <= t else sq
             for sq in s.squads]
    squads = _resolve_contested(_merge(moved), s.world)
    return GameState(t, squads, s.horizon, s.world)


def advance(s: GameState) -> GameState:
    """Forward until some player has an Idle squad or the state is terminal."""
    while not is_terminal(s) and not any(sq.order is None for sq in s.squads):
        s = forward(s)
    return s


def release_holds(s: GameState) -> GameState:
    """Cancel every Hold order so those squads become Idle now."""
    squads = [Squad(sq.owner, sq.unit_type, sq.count, sq.pool_hp, sq.region) if sq.is_holding else sq
              for sq in s.squads]
    return GameState(s.clock, _merge(squads), s.horizon, s.world)


def new_state(world: World, squads: Iterable[Squad], horizon: float = DEFAULT_HORIZON,
              clock: float = 0.0) -> GameState:
    """Build a canonical state (idle squads merged and sorted)."""
    return GameState(clock, _merge(squads), horizon, world)


def make_squad(world: World, owner: int, type_name: str, count: int, region: int) -> Squad:
    idx = world.catalog.index(type_name)
    return Squad(owner, idx, count, count * world.catalog[idx].max_hp, region)


def load_scenario(text: str, graph: RegionGraph, **world_options) -> GameState:
    horizon = DEFAULT_HORIZON
    types: list[UnitType] = []
    raw_squads: list[tuple[int, str, int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *args = line.split()
        try:
            if directive == "horizon":
                if len(args) != 1:
                    raise ScenarioFormatError("expected: horizon <seconds>", lineno)
                horizon = float(args[0])
                if not horizon > 0:
                    raise ScenarioFormatError("horizon must be positive", lineno)
            elif directive == "unittype":
                if len(args) != 7:
                    raise ScenarioFormatError(
                        "expected: unittype <name> <max_hp> <dps_ground> <dps_air> <flyer> <speed> <destroy_score>",
                        lineno)
                if args[4] not in ("0", "1"):
                    raise ScenarioFormatError("flyer flag must be 0 or 1", lineno)
                types.append(UnitType(args[0], float(args[1]), float(args[2]), float(args[3]),
                                      args[4] == "1", float(args[5]), float(args[6])))
            elif directive == "squad":
                if len(args) != 4:
                    raise ScenarioFormatError("expected: squad <player> <typename> <count> <region>", lineno)
                player, count, region = int(args[0]), int(args[2]), int(args[3])
                if player not in PLAYERS:
                    raise ScenarioFormatError(f"player must be 0 or 1, got {player}", lineno)
                if count < 1:
                    raise ScenarioFormatError("squad count must be positive", lineno)
                if not 0 <= region < graph.region_count:
                    raise ScenarioFormatError(f"region {region} not on the map", lineno)
                raw_squads.append((player, args[1], count, region, lineno))
            else:
                raise ScenarioFormatError(f"unknown directive '{directive}'", lineno)
        except ScenarioFormatError:
            raise
        except ValueError as exc:
            raise ScenarioFormatError(str(exc), lineno) from exc
    try:
        catalog = UnitTypeCatalog(types)
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc
    world = World(graph, catalog, **world_options)
    squads = []
    for player, name, count, region, lineno in raw_squads:
        try:
            idx = catalog.index(name)
        except KeyError as exc:
            raise ScenarioFormatError(f"unknown unit type {name!r}", lineno) from exc
        if not catalog[idx].is_combat:
            raise ScenarioFormatError(f"unit type {name!r} has no damage and cannot form a squad", lineno)
        squads.append(Squad(player, idx, count, count * catalog[idx].max_hp, region))
    return new_state(world, squads, horizon)


def dump_scenario(s: GameState) -> str:
    """Serialize an all-idle, full-health state back to the scenario format."""
    lines = [f"horizon {s.horizon!r}"]
    for t in s.world.catalog:
        lines.append(f"unittype {t.name} {t.max_hp!r} {t.dps_ground!r} {t.dps_air!r} "
                     f"{int(t.is_flyer)} {t.speed!r} {t.destroy_score!r}")
    for sq in s.squads:
        lines.append(f"squad {sq.owner} {s.world.catalog[sq.unit_type].name} {sq.count} {sq.region}")
    return "\n".join(lines) + "\n"
