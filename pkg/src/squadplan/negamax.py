"""Depth-limited Negamax over serialized durative decision points.

Every node is a decision point of one player (the player to move). Values
are kept from the mover's point of view using the antisymmetric material
evaluation, so no player-colour multiplier is needed. Because actions have
durations, the same player can decide at two consecutive nodes; a child's
value is negated only when the mover changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .actions import DEFAULT_ACTION_CAP, DEFAULT_FLYER_K, JointAction, generate_joint_actions
from .combat import evaluate
from .world import GameState, RulesError, apply_joint_action, advance, both_can_move, is_terminal, player_to_move


@dataclass
class NegamaxConfig:
    depth: int = 2
    action_cap: int = DEFAULT_ACTION_CAP
    flyer_k: int = DEFAULT_FLYER_K
    rng_seed: int = 0
    alpha_beta: bool = False


def step(s: GameState, p: int, action: JointAction) -> GameState:
    """Successor: apply ``p``'s joint action, then forward to the next decision point."""
    return advance(apply_joint_action(s, p, action))


def root_last_simult(s: GameState, player: int | None) -> int:
    """The ``last_simult`` marker that makes ``player`` the mover of ``s``.

    With ``player`` None, player 0 moves first at a simultaneous root.
    """
    if player is None:
        return 1
    if both_can_move(s):
        return 1 - player
    if player_to_move(s, 0) != player:
        raise RulesError(f"player {player} has no idle squads in this state")
    return 1 - player


class _Search:
    def __init__(self, cfg: NegamaxConfig):
        self.cfg = cfg
        self.nodes = 0

    def children(self, s: GameState, mover: int):
        cfg = self.cfg
        for a in generate_joint_actions(s, mover, cfg.action_cap, cfg.rng_seed, cfg.flyer_k):
            yield a, step(s, mover, a)

    def value(self, s: GameState, depth: int, mover: int, last_simult: int,
              alpha: float = -math.inf, beta: float = math.inf) -> float:
        """Negamax value of ``s`` from ``mover``'s point of view."""
        self.nodes += 1
        if depth == 0 or is_terminal(s):
            return evaluate(s, pov=mover)
        if both_can_move(s):
            last_simult = mover
        best = -math.inf
        for _, child in self.children(s, mover):
            v = self.child_value(child, depth - 1, mover, last_simult, max(alpha, best), beta)
            if v > best:
                best = v
            if self.cfg.alpha_beta and best >= beta:
                break
        return best

    def child_value(self, child: GameState, depth: int, mover: int, last_simult: int,
                    alpha: float, beta: float) -> float:
        nxt = None if is_terminal(child) else player_to_move(child, last_simult)
        if nxt is None or nxt == mover:
            return self.value(child, depth, mover, last_simult, alpha, beta)
        return -self.value(child, depth, nxt, last_simult, -beta, -alpha)


def negamax_plan(s: GameState, depth: int | None = None, cfg: NegamaxConfig | None = None,
                 player: int | None = None) -> tuple[JointAction, float]:
    """Best root joint action and its value for the player to move.

    Ties keep the first action in generation order.
    """
    action, value, _ = _plan(s, depth, cfg, player)
    return action, value


def _plan(s, depth, cfg, player):
    cfg = cfg or NegamaxConfig()
    depth = cfg.depth if depth is None else depth
    if depth < 1:
        raise ValueError("negamax needs depth >= 1 to choose an action")
    if is_terminal(s):
        raise RulesError("cannot plan from a terminal state")
    last_simult = root_last_simult(s, player)
    mover = player_to_move(s, last_simult)
    if mover is None:
        raise RulesError("no player has idle squads")
    if both_can_move(s):
        last_simult = mover
    search = _Search(cfg)
    search.nodes = 1
    best_action, best = None, -math.inf
    for a, child in search.children(s, mover):
        v = search.child_value(child, depth - 1, mover, last_simult, best, math.inf)
        if v > best:
            best_action, best = a, v
    return best_action, best, search.nodes


class NegamaxPlanner:
    """Stateless planner object; ``nodes`` records the size of the last search."""

    name = "negamax"

    def __init__(self, cfg: NegamaxConfig | None = None):
        self.cfg = cfg or NegamaxConfig()
        self.nodes = 0

    def plan(self, state: GameState, player: int, depth: int | None = None) -> JointAction:
        action, _, self.nodes = _plan(state, depth, self.cfg, player)
        return action
