"""Command line entry point: ``squadplan run ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .harness import PLANNERS, MatchConfig, PlannerParams, run_tournament


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="squadplan", description="Squad movement planning experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="play a seeded tournament and write a JSON report")

    src = run.add_mutually_exclusive_group()
    src.add_argument("--map", dest="map_file", metavar="FILE", help="map file (regions/pos/edge directives)")
    src.add_argument("--gen-regions", type=int, default=20, metavar="N", help="generated map size (default 20)")
    run.add_argument("--gen-isolated", type=int, default=5, metavar="K", help="air-only regions (default 5)")
    run.add_argument("--gen-seed", type=int, default=None, metavar="S",
                     help="map seed; defaults to each game's seed")
    run.add_argument("--scenario", dest="scenario_file", metavar="FILE",
                     help="scenario file; generated per game seed when omitted")
    run.add_argument("--gen-squads", type=int, default=4, metavar="N", help="squads per side for generated scenarios")
    run.add_argument("--p0", choices=PLANNERS, default="mctscd")
    run.add_argument("--p1", choices=PLANNERS, default="scripted-attack")
    run.add_argument("--games", type=int, default=1)
    run.add_argument("--seed", type=int, default=0, help="base seed; game i uses seed+i")
    run.add_argument("--replan-interval", type=float, default=10.0, metavar="SEC")
    run.add_argument("--game-limit", type=float, default=300.0, metavar="SEC")
    run.add_argument("--hold-duration", type=float, default=6.0, metavar="SEC")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")

    d = PlannerParams()
    keys = run.add_argument_group("planner keys")
    keys.add_argument("--mcts-iterations", type=int, default=d.mcts_iterations)
    keys.add_argument("--mcts-depth", type=int, default=d.mcts_depth)
    keys.add_argument("--max-sim-time", type=float, default=d.max_sim_time)
    keys.add_argument("--exploration-c", type=float, default=d.exploration_c)
    keys.add_argument("--deadline-ms", type=float, default=d.deadline_ms,
                      help="per-move wall budget; 0 or negative disables it")
    keys.add_argument("--negamax-depth", type=int, default=d.negamax_depth)
    keys.add_argument("--action-cap", type=int, default=d.action_cap)
    keys.add_argument("--flyer-k", type=int, default=d.flyer_k)
    keys.add_argument("--rng-seed", type=int, default=d.rng_seed)

    run.add_argument("--out", metavar="FILE", help="report path (stdout when omitted)")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    params = PlannerParams(
        mcts_iterations=args.mcts_iterations, mcts_depth=args.mcts_depth, max_sim_time=args.max_sim_time,
        exploration_c=args.exploration_c,
        deadline_ms=args.deadline_ms if args.deadline_ms and args.deadline_ms > 0 else None,
        negamax_depth=args.negamax_depth, action_cap=args.action_cap, flyer_k=args.flyer_k,
        rng_seed=args.rng_seed)
    try:
        cfg = MatchConfig(p0=args.p0, p1=args.p1, planner=params, map_file=args.map_file,
                          gen_regions=args.gen_regions, gen_isolated=args.gen_isolated, gen_seed=args.gen_seed,
                          scenario_file=args.scenario_file, gen_squads=args.gen_squads,
                          replan_interval=args.replan_interval, game_limit=args.game_limit,
                          hold_duration=args.hold_duration, seed=args.seed)
        report = run_tournament(cfg, args.games, args.seed, jobs=args.jobs)
    except (ValueError, OSError) as exc:
        print(f"squadplan: error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    s = report["summary"]
    print(f"{s['planner_a']} vs {s['planner_b']}: {s['wins_a']}-{s['wins_b']}-{s['draws']} "
          f"(win ratio {s['win_ratio_a']:.3f})", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
