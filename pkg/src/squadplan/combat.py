"""Engagement resolution and material evaluation.

The default resolver is a round-based pooled attrition model: every round
(one second) each side's units deal their damage per second, and that damage
is focused on the enemy squads in ascending order of remaining pool HP.
"""
from __future__ import annotations

import math
from typing import TYPE_CHECKING, Protocol, Sequence

if TYPE_CHECKING:
    from .world import GameState, Squad, UnitTypeCatalog

ROUND_SECONDS = 1.0
_DEAD_HP = 1e-9


class CombatResolver(Protocol):
    def __call__(self, squads: Sequence["Squad"], catalog: "UnitTypeCatalog") -> list["Squad"]: ...


def _target_key(sq: "Squad"):
    o = sq.order
    return (sq.pool_hp, sq.owner, sq.unit_type, sq.count,
            -1 if o is None else o.target, -1.0 if o is None else o.arrival)


def resolve_combat(squads: Sequence["Squad"], catalog: "UnitTypeCatalog",
                   max_rounds: int = 600) -> list["Squad"]:
    """Fight out one region; return the survivors.

    Stops when a side is wiped out, when neither side can damage the other
    (e.g. ground-only attackers against flyers), or after ``max_rounds``.
    Squad order in the input does not matter.
    """
    if not squads:
        return []
    region = squads[0].region
    if any(sq.region != region for sq in squads):
        raise ValueError("all squads in an engagement must share one region")
    if {sq.owner for sq in squads} != {0, 1}:
        raise ValueError("an engagement needs squads of both players")
    if any(not sq.is_stationary for sq in squads):
        raise ValueError("squads in transit cannot fight")

    squads = sorted(squads, key=_target_key)
    types = [catalog[sq.unit_type] for sq in squads]
    owner = [sq.owner for sq in squads]
    flyer = [t.is_flyer for t in types]
    hp = [sq.pool_hp for sq in squads]
    count = [sq.count for sq in squads]
    alive = list(range(len(squads)))

    for _ in range(max_rounds):
        ground_dmg = [0.0, 0.0]
        air_dmg = [0.0, 0.0]
        for i in alive:
            ground_dmg[owner[i]] += count[i] * types[i].dps_ground * ROUND_SECONDS
            air_dmg[owner[i]] += count[i] * types[i].dps_air * ROUND_SECONDS
        can_hit = False
        for side in (0, 1):
            for j in alive:
                if owner[j] != side and (air_dmg[side] if flyer[j] else ground_dmg[side]) > 0:
                    can_hit = True
                    break
        if not can_hit:
            break

        new_hp = hp[:]
        for side in (0, 1):
            pools = [ground_dmg[side], air_dmg[side]]
            targets = sorted((j for j in alive if owner[j] != side), key=lambda j: (hp[j], j))
            for j in targets:
                k = 1 if flyer[j] else 0
                if pools[k] <= 0:
                    continue
                dealt = min(pools[k], hp[j])
                new_hp[j] -= dealt
                pools[k] -= dealt
        hp = new_hp
        survivors = []
        for i in alive:
            if hp[i] <= _DEAD_HP:
                continue
            count[i] = min(count[i], math.ceil(hp[i] / types[i].max_hp - 1e-9))
            survivors.append(i)
        alive = survivors
        if len({owner[i] for i in alive}) < 2:
            break

    return [squads[i] if hp[i] == squads[i].pool_hp else squads[i].damaged(count[i], hp[i])
            for i in alive]


def material(s: "GameState", player: int, hp_weighted: bool = False) -> float:
    catalog = s.world.catalog
    total = 0.0
    for sq in s.squads:
        if sq.owner == player:
            t = catalog[sq.unit_type]
            units = sq.pool_hp / t.max_hp if hp_weighted else sq.count
            total += units * t.destroy_score
    return total


def evaluate(s: "GameState", catalog: "UnitTypeCatalog" = None, pov: int = 0,
             hp_weighted: bool | None = None) -> float:
    """Own destroy-score mass minus the opponent's, from ``pov``'s side.

    Counts surviving units by default; ``hp_weighted`` counts fractional
    units by remaining pool HP instead.
    """
    if catalog is not None and catalog is not s.world.catalog:
        s = _with_catalog(s, catalog)
    if hp_weighted is None:
        hp_weighted = s.world.hp_weighted_eval
    return material(s, pov, hp_weighted) - material(s, 1 - pov, hp_weighted)


def total_mass(s: "GameState") -> float:
    """Destroy-score mass of every unit on the board (both players)."""
    return material(s, 0) + material(s, 1)


def _with_catalog(s, catalog):
    from dataclasses import replace
    return replace(s, world=replace(s.world, catalog=catalog))
