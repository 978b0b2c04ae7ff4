"""Monte Carlo Tree Search Considering Durations (MCTSCD).

Decision points where both players have idle squads are serialized: the
``last_simult`` marker records who moved at the previous simultaneous point
and the other player goes first at the next one. Rewards are the material
evaluation from player 0's side, normalized by the root's total
destroy-score mass, and converted to the chooser's side at selection time.
"""
from __future__ import annotations

import gc
import math
import random
import threading
import time
import weakref
from dataclasses import dataclass

from .actions import DEFAULT_ACTION_CAP, DEFAULT_FLYER_K, JointAction, generate_joint_actions, random_joint_action
from .combat import evaluate, total_mass
from .negamax import root_last_simult, step
from .world import (GameState, RulesError, apply_joint_action, both_can_move, forward, is_terminal,
                    player_to_move)


@dataclass
class MctsConfig:
    iterations: int = 1000
    depth: int = 8
    max_sim_time: float = 60.0
    exploration_c: float = 1.0
    deadline_ms: float | None = None
    rng_seed: int = 0
    action_cap: int = DEFAULT_ACTION_CAP
    flyer_k: int = DEFAULT_FLYER_K

    def __post_init__(self):
        if self.iterations < 1 or self.depth < 1:
            raise ValueError("iterations and depth must be positive")
        if self.max_sim_time < 0 or self.exploration_c < 0:
            raise ValueError("max_sim_time and exploration_c must be non-negative")
        if self.deadline_ms is not None and self.deadline_ms < 0:
            raise ValueError("deadline_ms must be non-negative")


class GameNode:
    # The parent link is weak so a discarded tree has no reference cycles and
    # is freed at once instead of waiting for a (slow, unpredictable) full GC.
    __slots__ = ("_parent", "__weakref__", "actions", "total_evaluation", "total_visits", "game_state",
                 "actions_probability", "last_simult", "player", "children", "untried",
                 "depth", "order", "rollouts", "terminal")

    def __init__(self, game_state: GameState, parent: GameNode | None, actions: JointAction | None,
                 last_simult: int, depth: int, order: int = 0, actions_probability: float = 1.0):
        self._parent = None if parent is None else weakref.ref(parent)
        self.actions = actions
        self.game_state = game_state
        self.total_evaluation = 0.0
        self.total_visits = 0
        self.rollouts = 0
        self.actions_probability = actions_probability
        self.depth = depth
        self.order = order
        self.children: list[GameNode] = []
        self.untried: list[tuple[int, JointAction]] = []
        self.terminal = is_terminal(game_state)
        # CreateNode: inherit last_simult, pick the mover, re-mark at simultaneous points.
        self.last_simult = last_simult
        self.player = None if self.terminal else player_to_move(game_state, last_simult)
        if self.player is not None and both_can_move(game_state):
            self.last_simult = self.player

    @property
    def parent(self) -> GameNode | None:
        return None if self._parent is None else self._parent()

    def mean(self) -> float:
        return self.total_evaluation / self.total_visits if self.total_visits else 0.0

    def iter_tree(self):
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(n.children)

    def __repr__(self):
        return (f"GameNode(depth={self.depth}, player={self.player}, visits={self.total_visits}, "
                f"eval={self.total_evaluation:.3f}, children={len(self.children)})")


class MCTSCD:
    """One search instance; ``plan`` may be called repeatedly (no tree reuse)."""

    name = "mctscd"

    def __init__(self, cfg: MctsConfig | None = None):
        self.cfg = cfg or MctsConfig()
        self.root: GameNode | None = None
        self.iterations_done = 0
        self._scale = 1.0
        self._rng = random.Random(self.cfg.rng_seed)

    # -- node construction -------------------------------------------------
    def _expandable(self, node: GameNode) -> bool:
        return not node.terminal and node.depth < self.cfg.depth

    def _init_actions(self, node: GameNode) -> None:
        if self._expandable(node):
            acts = generate_joint_actions(node.game_state, node.player, self.cfg.action_cap,
                                          self._rng.getrandbits(32), self.cfg.flyer_k)
            node.untried = list(enumerate(acts))

    def create_root(self, s: GameState, player: int | None = None) -> GameNode:
        if is_terminal(s):
            raise RulesError("cannot plan from a terminal state")
        root = GameNode(s, None, None, root_last_simult(s, player), 0)
        if root.player is None:
            raise RulesError("no player has idle squads")
        self._init_actions(root)
        self._scale = total_mass(s) or 1.0
        return root

    def expand(self, node: GameNode) -> GameNode:
        k = self._rng.randrange(len(node.untried))
        node.untried[k], node.untried[-1] = node.untried[-1], node.untried[k]
        order, action = node.untried.pop()
        siblings = len(node.children) + len(node.untried) + 1
        child = GameNode(step(node.game_state, node.player, action), node, action,
                         node.last_simult, node.depth + 1, order, 1.0 / siblings)
        self._init_actions(child)
        node.children.append(child)
        return child

    # -- the four phases ---------------------------------------------------
    def uct_child(self, node: GameNode, c: float) -> GameNode:
        sign = 1.0 if node.player == 0 else -1.0
        log_n = math.log(node.total_visits) if node.total_visits > 0 else 0.0
        best, best_key = None, None
        for ch in node.children:
            if ch.total_visits == 0:
                return ch
            score = sign * ch.total_evaluation / ch.total_visits + c * math.sqrt(log_n / ch.total_visits)
            key = (score, -ch.order)
            if best_key is None or key > best_key:
                best, best_key = ch, key
        return best

    def tree_policy(self, root: GameNode) -> GameNode:
        node = root
        while self._expandable(node):
            if node.untried:
                return self.expand(node)
            if not node.children:
                break
            node = self.uct_child(node, self.cfg.exploration_c)
        return node

    def default_policy(self, node: GameNode) -> float:
        """Uniform-random playout from ``node``; returns the normalized player-0 reward."""
        s = node.game_state
        last_simult = node.last_simult
        limit = s.clock + self.cfg.max_sim_time
        rng, k = self._rng, self.cfg.flyer_k
        while not is_terminal(s) and s.clock < limit:
            p = player_to_move(s, last_simult)
            if both_can_move(s):
                last_simult = p
            s = apply_joint_action(s, p, random_joint_action(s, p, rng, k))
            while not is_terminal(s) and s.clock < limit and not any(sq.order is None for sq in s.squads):
                s = forward(s, until=limit)
        return evaluate(s, pov=0) / self._scale

    @staticmethod
    def backup(leaf: GameNode, reward: float) -> None:
        if not math.isfinite(reward):
            raise ValueError(f"non-finite reward {reward}")
        leaf.rollouts += 1
        node = leaf
        while node is not None:
            node.total_visits += 1
            node.total_evaluation += reward
            node = node.parent

    # -- driver ------------------------------------------------------------
    def best_child(self, root: GameNode) -> GameNode | None:
        sign = 1.0 if root.player == 0 else -1.0
        best, best_key = None, None
        for ch in root.children:
            key = (ch.total_visits, sign * ch.total_evaluation, -ch.order)
            if best_key is None or key > best_key:
                best, best_key = ch, key
        return best

    def search(self, s: GameState, player: int | None = None,
               cancel: threading.Event | None = None) -> GameNode:
        start = time.perf_counter()
        deadline = None if self.cfg.deadline_ms is None else start + self.cfg.deadline_ms / 1000.0
        self._rng = random.Random(self.cfg.rng_seed)
        root = self.root = self.create_root(s, player)
        self.iterations_done = 0
        # Under a deadline, park the pre-existing heap in the permanent
        # generation so collections triggered mid-search only scan search
        # objects; a full pass over a large heap can exceed the slack alone.
        frozen = deadline is not None and gc.isenabled()
        if frozen:
            gc.freeze()
        try:
            for _ in range(self.cfg.iterations):
                if deadline is not None and time.perf_counter() >= deadline:
                    break
                if cancel is not None and cancel.is_set():
                    break
                leaf = self.tree_policy(root)
                self.backup(leaf, self.default_policy(leaf))
                self.iterations_done += 1
        finally:
            if frozen:
                gc.unfreeze()
        return root

    def plan(self, s: GameState, player: int | None = None,
             cancel: threading.Event | None = None) -> JointAction:
        root = self.search(s, player, cancel)
        best = self.best_child(root)
        if best is not None:
            return best.actions
        # no iteration finished: fall back to the first generated action (all-Hold)
        if root.untried:
            return min(root.untried, key=lambda t: t[0])[1]
        return generate_joint_actions(s, root.player, self.cfg.action_cap, self.cfg.rng_seed, self.cfg.flyer_k)[0]


def mcts_plan(s: GameState, cfg: MctsConfig | None = None, player: int | None = None,
              cancel: threading.Event | None = None) -> JointAction:
    return MCTSCD(cfg).plan(s, player, cancel)


def check_visit_accounting(root: GameNode, iterations: int) -> list[str]:
    """Violations of the visit bookkeeping identities (empty list when consistent)."""
    problems = []
    if root.total_visits != iterations:
        problems.append(f"root visits {root.total_visits} != iterations {iterations}")
    for n in root.iter_tree():
        child_sum = sum(c.total_visits for c in n.children)
        if n.total_visits != child_sum + n.rollouts:
            problems.append(f"{n!r}: visits != children {child_sum} + own rollouts {n.rollouts}")
        if n.children and n.rollouts > 1:
            problems.append(f"{n!r}: internal node received {n.rollouts} rollouts")
        if n.parent is not None and n is not root and n.children and n.total_visits != 1 + child_sum:
            problems.append(f"{n!r}: internal visits != 1 + children")
    return problems
