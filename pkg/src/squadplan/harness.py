"""Match loop with replanning, scripted opponents and seeded tournaments."""
from __future__ import annotations

import concurrent.futures
import logging
import random
import statistics
import threading
import time
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .actions import DEFAULT_ACTION_CAP, DEFAULT_FLYER_K, JointAction, SquadOrder, random_joint_action
from .combat import material
from .mapgraph import RegionGraph, UNREACHABLE, connected_components, generate_map, load_map
from .mcts import MCTSCD, MctsConfig
from .negamax import NegamaxConfig, NegamaxPlanner
from .world import (DEFAULT_HOLD_DURATION, GameState, Squad, TerminalReason, UnitType, UnitTypeCatalog, World,
                    apply_joint_action, both_can_move, forward, load_scenario, new_state, player_to_move,
                    release_holds, settle, terminal_reason)

log = logging.getLogger(__name__)

PLANNERS = ("mctscd", "negamax", "scripted-attack", "scripted-random")

DEFAULT_CATALOG = UnitTypeCatalog([
    UnitType("infantry", max_hp=40.0, dps_ground=8.0, dps_air=6.0, is_flyer=False, speed=3.0, destroy_score=50.0),
    UnitType("armor", max_hp=150.0, dps_ground=20.0, dps_air=0.0, is_flyer=False, speed=2.5, destroy_score=150.0),
    UnitType("gunship", max_hp=100.0, dps_ground=10.0, dps_air=8.0, is_flyer=True, speed=4.0, destroy_score=125.0),
])


# -- scenarios -------------------------------------------------------------

def generate_scenario(graph: RegionGraph, seed: int, squads_per_side: int = 4,
                      catalog: UnitTypeCatalog = DEFAULT_CATALOG, horizon: float = 300.0,
                      hold_duration: float = DEFAULT_HOLD_DURATION, flyers: bool = True) -> GameState:
    """Mirror-composition scenario: both players field the same squads.

    Homes are the two most distant regions of the largest ground component;
    squad i of each side stands at the same proximity rank from its home.
    """
    rng = random.Random(seed)
    main = sorted(max(connected_components(graph), key=lambda c: (len(c), -min(c))))
    if len(main) < 2:
        raise ValueError("scenario generation needs a ground component with at least two regions")
    home0, home1 = max(((a, b) for a in main for b in main if a < b),
                       key=lambda ab: (graph.distances_from(ab[0])[ab[1]], -ab[0], -ab[1]))
    type_ids = [i for i, t in enumerate(catalog) if t.is_combat and (flyers or not t.is_flyer)]
    near0 = sorted(main, key=lambda r: (graph.distances_from(home0)[r], r))
    near1 = sorted(main, key=lambda r: (graph.distances_from(home1)[r], r))
    spread = max(1, min(3, len(main) // 4))
    squads = []
    for _ in range(squads_per_side):
        t = rng.choice(type_ids)
        count = rng.randint(2, 6)
        rank = rng.randrange(spread)
        for owner, near in ((0, near0), (1, near1)):
            squads.append(Squad(owner, t, count, count * catalog[t].max_hp, near[rank]))
    world = World(graph, catalog, hold_duration=hold_duration)
    return new_state(world, squads, horizon)


# -- scripted opponents ----------------------------------------------------

def scripted_attack_policy(s: GameState, p: int) -> JointAction:
    """Every idle squad heads for the nearest enemy-occupied region.

    Ground squads take one step along a shortest ground path; flyers fly
    straight there. Squads already sharing a region with the enemy, or
    unable to reach any enemy, hold.
    """
    g = s.world.graph
    enemy_regions = sorted({sq.region for sq in s.squads if sq.owner != p})
    orders = []
    for ref in s.idle_refs(p):
        sq = s.squads[ref]
        target = None
        if enemy_regions and sq.region not in enemy_regions:
            if s.world.catalog[sq.unit_type].is_flyer:
                target = min(enemy_regions, key=lambda r: (g.air_distance(sq.region, r), r))
            else:
                dist = g.distances_from(sq.region)
                goal = min(enemy_regions, key=lambda r: (dist[r], r))
                if dist[goal] != UNREACHABLE:
                    to_goal = g.distances_from(goal)
                    target = min(g.adjacent(sq.region), key=lambda nl: (nl[1] + to_goal[nl[0]], nl[0]))[0]
        orders.append(SquadOrder(ref, target))
    return JointAction(tuple(orders))


class ScriptedAttack:
    name = "scripted-attack"

    def plan(self, state: GameState, player: int) -> JointAction:
        return scripted_attack_policy(state, player)


class ScriptedRandom:
    name = "scripted-random"

    def __init__(self, seed: int = 0, flyer_k: int = DEFAULT_FLYER_K):
        self.rng = random.Random(seed)
        self.flyer_k = flyer_k

    def plan(self, state: GameState, player: int) -> JointAction:
        return random_joint_action(state, player, self.rng, self.flyer_k)


class TimedNegamax:
    """Negamax with the depth fitted to a per-move wall-time budget.

    Negamax itself cannot be interrupted, so depth d+1 is only started when
    the time of depth d times the observed growth factor still fits.
    """

    name = "negamax"

    def __init__(self, cfg: NegamaxConfig, deadline_ms: float | None = None):
        self.planner = NegamaxPlanner(cfg)
        self.max_depth = cfg.depth
        self.deadline_ms = deadline_ms
        self.depth_used = 0

    def plan(self, state: GameState, player: int) -> JointAction:
        if self.deadline_ms is None:
            self.depth_used = self.max_depth
            return self.planner.plan(state, player)
        budget = self.deadline_ms / 1000.0
        start = time.perf_counter()
        t0 = start
        action = self.planner.plan(state, player, depth=1)
        last_time, prev_nodes, depth = time.perf_counter() - t0, 1, 1
        while depth < self.max_depth:
            growth = max(1.0, self.planner.nodes / prev_nodes)
            if (time.perf_counter() - start) + last_time * growth > budget:
                break
            prev_nodes = self.planner.nodes
            t0 = time.perf_counter()
            action = self.planner.plan(state, player, depth=depth + 1)
            last_time = time.perf_counter() - t0
            depth += 1
        self.depth_used = depth
        return action


class SearchPlanner:
    """MCTSCD with a fresh, deterministic rng seed per decision."""

    name = "mctscd"

    def __init__(self, cfg: MctsConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        self.calls = 0
        self.iterations = 0

    def plan(self, state: GameState, player: int) -> JointAction:
        cfg = MctsConfig(**{**asdict(self.cfg), "rng_seed": (self.seed * 1_000_003 + self.calls) & 0xFFFFFFFF})
        self.calls += 1
        search = MCTSCD(cfg)
        action = search.plan(state, player)
        self.iterations = search.iterations_done
        return action


# -- config & results ------------------------------------------------------

@dataclass
class PlannerParams:
    mcts_iterations: int = 100_000
    mcts_depth: int = 8
    max_sim_time: float = 60.0
    exploration_c: float = 1.0
    deadline_ms: float | None = 30.0
    negamax_depth: int = 2
    action_cap: int = DEFAULT_ACTION_CAP
    flyer_k: int = DEFAULT_FLYER_K
    rng_seed: int = 0


@dataclass
class MatchConfig:
    p0: str = "mctscd"
    p1: str = "scripted-attack"
    planner: PlannerParams = field(default_factory=PlannerParams)
    map_file: str | None = None
    gen_regions: int = 20
    gen_isolated: int = 5
    gen_seed: int | None = None
    scenario_file: str | None = None
    gen_squads: int = 4
    replan_interval: float = 10.0
    game_limit: float = 300.0
    hold_duration: float = DEFAULT_HOLD_DURATION
    seed: int = 0

    def __post_init__(self):
        for name in (self.p0, self.p1):
            if name not in PLANNERS:
                raise ValueError(f"unknown planner {name!r}; choose from {', '.join(PLANNERS)}")
        if not self.replan_interval > 0 or self.game_limit < self.replan_interval:
            raise ValueError("need game_limit >= replan_interval > 0")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class MatchResult:
    winner: int | None
    reason: str
    end_clock: float
    material: list[float]
    planners: list[str]
    decisions: list[dict] = field(default_factory=list)

    def mean_wall_ms(self, player: int) -> float | None:
        walls = [d["wall_ms"] for d in self.decisions if d["player"] == player]
        return statistics.fmean(walls) if walls else None

    def to_json(self, with_decisions: bool = True) -> dict:
        out = asdict(self)
        if not with_decisions:
            out.pop("decisions")
        return out


def build_initial_state(cfg: MatchConfig) -> GameState:
    if cfg.map_file is not None:
        graph = load_map(Path(cfg.map_file).read_text())
    else:
        graph = generate_map(cfg.seed if cfg.gen_seed is None else cfg.gen_seed, cfg.gen_regions, cfg.gen_isolated)
    if cfg.scenario_file is not None:
        s = load_scenario(Path(cfg.scenario_file).read_text(), graph, hold_duration=cfg.hold_duration)
    else:
        s = generate_scenario(graph, cfg.seed, cfg.gen_squads, hold_duration=cfg.hold_duration)
    return GameState(s.clock, s.squads, cfg.game_limit, s.world)


def make_planner(name: str, params: PlannerParams, seed: int):
    if name == "mctscd":
        return SearchPlanner(MctsConfig(iterations=params.mcts_iterations, depth=params.mcts_depth,
                                        max_sim_time=params.max_sim_time, exploration_c=params.exploration_c,
                                        deadline_ms=params.deadline_ms, rng_seed=params.rng_seed,
                                        action_cap=params.action_cap, flyer_k=params.flyer_k), seed)
    if name == "negamax":
        return TimedNegamax(NegamaxConfig(depth=params.negamax_depth, action_cap=params.action_cap,
                                          flyer_k=params.flyer_k, rng_seed=params.rng_seed), params.deadline_ms)
    if name == "scripted-attack":
        return ScriptedAttack()
    if name == "scripted-random":
        return ScriptedRandom(seed, params.flyer_k)
    raise ValueError(f"unknown planner {name!r}")


def outcome(s: GameState) -> tuple[int | None, str]:
    reason = terminal_reason(s)
    m0, m1 = material(s, 0), material(s, 1)
    if reason is TerminalReason.ELIMINATION:
        alive = {sq.owner for sq in s.squads}
        return (alive.pop() if alive else None), reason.value
    winner = 0 if m0 > m1 else 1 if m1 > m0 else None
    return winner, "timeout"


def run_match(cfg: MatchConfig, initial: GameState | None = None) -> MatchResult:
    """Play one game; deterministic when no deadline is configured."""
    state = settle(initial if initial is not None else build_initial_state(cfg))
    names = [cfg.p0, cfg.p1]
    planners = [make_planner(name, cfg.planner, cfg.seed * 2 + i + cfg.planner.rng_seed)
                for i, name in enumerate(names)]
    decisions = []
    last_simult = 1
    next_epoch = state.clock + cfg.replan_interval
    while terminal_reason(state) is None:
        p = player_to_move(state, last_simult)
        while p is not None:
            if both_can_move(state):
                last_simult = p
            t0 = time.perf_counter()
            action = planners[p].plan(state, p)
            wall_ms = (time.perf_counter() - t0) * 1000.0
            decisions.append({"clock": state.clock, "player": p, "action": action.to_json(),
                              "wall_ms": round(wall_ms, 3)})
            state = apply_joint_action(state, p, action)
            p = player_to_move(state, last_simult)
        state = forward(state, until=next_epoch)
        if terminal_reason(state) is None and state.clock >= next_epoch:
            state = release_holds(state)
            next_epoch += cfg.replan_interval
    winner, reason = outcome(state)
    return MatchResult(winner, reason, state.clock, [material(state, 0), material(state, 1)], names, decisions)


# -- tournaments -----------------------------------------------------------

def _play_game(cfg: MatchConfig, seed: int, swap: bool) -> dict:
    game_cfg = MatchConfig(**{**cfg.__dict__, "seed": seed,
                              "p0": cfg.p1 if swap else cfg.p0, "p1": cfg.p0 if swap else cfg.p1})
    side_a = 1 if swap else 0
    try:
        res = run_match(game_cfg)
    except Exception as exc:  # recorded per game, the tournament goes on
        log.warning("game %d failed: %s", seed, exc)
        return {"seed": seed, "side_a": side_a, "error": f"{type(exc).__name__}: {exc}",
                "trace": traceback.format_exc(limit=3)}
    winner = None if res.winner is None else ("a" if res.winner == side_a else "b")
    return {"seed": seed, "side_a": side_a, "winner": winner, "reason": res.reason,
            "end_clock": res.end_clock, "material": res.material,
            "wall_ms_a": res.mean_wall_ms(side_a), "wall_ms_b": res.mean_wall_ms(1 - side_a),
            "max_wall_ms_a": max((d["wall_ms"] for d in res.decisions if d["player"] == side_a), default=None),
            "decisions": len(res.decisions)}


def summarize(cfg: MatchConfig, games: list[dict]) -> dict:
    ok = [g for g in games if "error" not in g]
    n = len(games)

    def mean(key):
        vals = [g[key] for g in ok if g.get(key) is not None]
        return statistics.fmean(vals) if vals else None

    wins_a = sum(g["winner"] == "a" for g in ok)
    wins_b = sum(g["winner"] == "b" for g in ok)
    return {
        "planner_a": cfg.p0,
        "planner_b": cfg.p1,
        "games": n,
        "errors": n - len(ok),
        "wins_a": wins_a,
        "wins_b": wins_b,
        "draws": len(ok) - wins_a - wins_b,
        "win_ratio_a": wins_a / n if n else 0.0,
        "win_ratio_b": wins_b / n if n else 0.0,
        "mean_end_clock": mean("end_clock"),
        "mean_wall_ms_a": mean("wall_ms_a"),
        "mean_wall_ms_b": mean("wall_ms_b"),
    }


def run_tournament(cfg: MatchConfig, games: int, base_seed: int = 0, jobs: int = 1) -> dict:
    """Play ``games`` matches with seeds base_seed.., swapping sides every other game.

    Planner ``a`` is ``cfg.p0``; it plays side 0 in even games and side 1 in
    odd games. Results are ordered by seed before aggregation.
    """
    if games < 1:
        raise ValueError("games must be >= 1")
    jobs_list = [(cfg, base_seed + i, i % 2 == 1) for i in range(games)]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_play_game, *zip(*jobs_list)))
    else:
        results = [_play_game(*job) for job in jobs_list]
    results.sort(key=lambda g: g["seed"])
    return {"config": cfg.to_json(), "base_seed": base_seed, "results": results,
            "summary": summarize(cfg, results)}


# -- background planning ---------------------------------------------------

class BackgroundPlan:
    """Run an MCTSCD search on a worker thread so the caller keeps running.

    ``result()`` waits for the search; ``stop()`` cancels it early and the
    best action found so far is returned.
    """

    def __init__(self, search: MCTSCD, state: GameState, player: int):
        self._cancel = threading.Event()
        self._action: JointAction | None = None
        self._error: BaseException | None = None
        self._thread = threading.Thread(target=self._run, args=(search, state, player), daemon=True)
        self._thread.start()

    def _run(self, search, state, player):
        try:
            self._action = search.plan(state, player, self._cancel)
        except BaseException as exc:  # re-raised in result()
            self._error = exc

    def done(self) -> bool:
        return not self._thread.is_alive()

    def stop(self) -> JointAction:
        self._cancel.set()
        return self.result()

    def result(self, timeout: float | None = None) -> JointAction:
        self._thread.join(timeout)
        if self._thread.is_alive():
            raise TimeoutError("search still running")
        if self._error is not None:
            raise self._error
        return self._action
