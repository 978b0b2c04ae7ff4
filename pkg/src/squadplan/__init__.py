"""Squad movement planning over a region graph: MCTSCD and Negamax planners,
an attrition combat model and a seeded tournament harness."""

from .actions import JointAction, SquadOrder, generate_joint_actions
from .combat import evaluate, resolve_combat
from .mapgraph import RegionGraph, connected_components, dump_map, generate_map, ground_distance, load_map, neighbors
from .mcts import MCTSCD, GameNode, MctsConfig, mcts_plan
from .negamax import NegamaxConfig, NegamaxPlanner, negamax_plan
from .world import (GameState, Moving, Squad, UnitType, UnitTypeCatalog, World, apply_joint_action, both_can_move,
                    forward, is_terminal, load_scenario, merge_idle_squads, player_to_move, terminal_reason)

__all__ = [
    "JointAction", "SquadOrder", "generate_joint_actions", "evaluate", "resolve_combat",
    "RegionGraph", "connected_components", "dump_map", "generate_map", "ground_distance",
    "load_map", "neighbors", "MCTSCD", "GameNode", "MctsConfig", "mcts_plan", "NegamaxConfig",
    "NegamaxPlanner", "negamax_plan", "GameState", "Moving", "Squad", "UnitType", "UnitTypeCatalog",
    "World", "apply_joint_action", "both_can_move", "forward", "is_terminal", "load_scenario",
    "merge_idle_squads", "player_to_move", "terminal_reason",
]

__version__ = "0.1.0"
