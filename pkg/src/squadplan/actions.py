"""Joint-action enumeration for the player to move."""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

from .world import GameState, RulesError, Squad, World

DEFAULT_ACTION_CAP = 128
DEFAULT_FLYER_K = 8


@dataclass(frozen=True, slots=True)
class SquadOrder:
    """Order for the squad at ``squad_ref`` in the state's squad list.

    ``target`` None means Hold, otherwise Move(target).
    """

    squad_ref: int
    target: int | None = None

    @property
    def kind(self) -> str:
        return "hold" if self.target is None else "move"


@dataclass(frozen=True, slots=True)
class JointAction:
    orders: tuple[SquadOrder, ...]

    @property
    def is_all_hold(self) -> bool:
        return all(o.target is None for o in self.orders)

    def targets(self, state: GameState) -> list[int]:
        """Destination region per order (own region for Hold)."""
        return [state.squads[o.squad_ref].region if o.target is None else o.target for o in self.orders]

    def to_json(self) -> list[dict]:
        return [{"squad": o.squad_ref, "order": o.kind, **({"target": o.target} if o.target is not None else {})}
                for o in self.orders]


def squad_options(world: World, squad: Squad, flyer_k: int = DEFAULT_FLYER_K) -> list[int | None]:
    """[Hold] followed by legal Move targets.

    Ground squads may move to adjacent regions (ascending id). Flyers may fly
    anywhere, truncated to the ``flyer_k`` nearest regions by air distance.
    """
    key = (squad.unit_type, squad.region, flyer_k)
    cached = world.option_cache.get(key)
    if cached is not None:
        return cached
    g = world.graph
    if world.catalog[squad.unit_type].is_flyer:
        here = squad.region
        others = sorted((g.air_distance(here, r), r) for r in g.regions if r != here)
        options = [None] + [r for _, r in others[:flyer_k]]
    else:
        options = [None] + [n for n, _ in g.adjacent(squad.region)]
    world.option_cache[key] = options
    return options


def option_table(s: GameState, p: int, flyer_k: int = DEFAULT_FLYER_K) -> tuple[list[int], list[list[int | None]]]:
    refs = s.idle_refs(p)
    if not refs:
        raise RulesError(f"player {p} has no idle squads")
    return refs, [squad_options(s.world, s.squads[r], flyer_k) for r in refs]


def _build(refs, options, idx) -> JointAction:
    return JointAction(tuple(SquadOrder(r, opts[i]) for r, opts, i in zip(refs, options, idx)))


def generate_joint_actions(s: GameState, p: int, cap: int = DEFAULT_ACTION_CAP, rng_seed: int = 0,
                           flyer_k: int = DEFAULT_FLYER_K) -> list[JointAction]:
    """Every joint action of ``p`` if there are at most ``cap``, else a seeded sample.

    The sample has ``cap`` distinct joint actions, always contains all-Hold,
    and is listed in Cartesian-product order (so all-Hold comes first).
    """
    if cap < 1:
        raise ValueError("cap must be positive")
    refs, options = option_table(s, p, flyer_k)
    sizes = [len(o) for o in options]
    total = math.prod(sizes)
    if total <= cap:
        return [_build(refs, options, idx) for idx in itertools.product(*map(range, sizes))]
    rng = random.Random(rng_seed)
    chosen = {tuple(0 for _ in sizes)}
    while len(chosen) < cap:
        chosen.add(tuple(rng.randrange(n) for n in sizes))
    return [_build(refs, options, idx) for idx in sorted(chosen)]


def random_joint_action(s: GameState, p: int, rng: random.Random, flyer_k: int = DEFAULT_FLYER_K) -> JointAction:
    """Uniform draw from the full joint action space (independent per squad)."""
    refs, options = option_table(s, p, flyer_k)
    return JointAction(tuple(SquadOrder(r, opts[rng.randrange(len(opts))]) for r, opts in zip(refs, options)))
