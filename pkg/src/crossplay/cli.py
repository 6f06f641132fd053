"""Command-line entry point: ``crossplay {run,tournament,theorem-check,exploit}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .evaluation import (PREFERENCE_PRESERVING, ExperimentConfig, exploitability_report,
                         load_policy, resolve_game, run_experiment, theorem_check, tournament)
from .games import MotivatingParams
from .meta import NashSolverError
from .validation import ConfigurationError


def _json_arg(text):
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not valid JSON: {exc}") from None
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("expected a JSON object")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crossplay", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="experiment JSON file")
    run.add_argument("--output-dir", help="override the config's output_dir")

    tour = sub.add_parser("tournament", help="Elo ratings of policies from exact pairwise scores")
    tour.add_argument("game", help="game id or matrix-game JSON file")
    tour.add_argument("policies", nargs="+", help="policy JSON files")
    tour.add_argument("--params", type=_json_arg, default={}, help="game params as JSON")

    thm = sub.add_parser("theorem-check", help="empirical checks of the self-play theorems")
    thm.add_argument("which", type=int, choices=(1, 2))
    thm.add_argument("--trials", type=int, default=100)
    thm.add_argument("--seed", type=int, default=0)
    thm.add_argument("--steps", type=int, default=2000)
    thm.add_argument("--rules", nargs="+", default=None,
                     help="update rules (default: all preference-preserving rules for 1, "
                          "stepwise_br for 2)")
    thm.add_argument("--params", type=_json_arg, default={},
                     help="motivating game params as JSON, e.g. '{\"N\": 3}'")

    exp = sub.add_parser("exploit", help="exploitability of a policy file")
    exp.add_argument("game", help="game id or matrix-game JSON file")
    exp.add_argument("policy", help="policy JSON file")
    exp.add_argument("--params", type=_json_arg, default={}, help="game params as JSON")
    return parser


def _dump(doc) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = ExperimentConfig.load(args.config)
            _dump(run_experiment(cfg, args.output_dir))
        elif args.command == "tournament":
            game = resolve_game(args.game, args.params)
            table = tournament(game, [load_policy(p) for p in args.policies], args.policies)
            _dump(table.to_dict())
        elif args.command == "theorem-check":
            rules = args.rules or (PREFERENCE_PRESERVING if args.which == 1 else ("stepwise_br",))
            report = theorem_check(args.which, MotivatingParams(**args.params), trials=args.trials,
                                   seed=args.seed, rules=tuple(rules), steps=args.steps)
            _dump(report)
            return 0 if report["holds"] else 1
        else:
            game = resolve_game(args.game, args.params)
            _dump(exploitability_report(game, load_policy(args.policy)))
    except (ConfigurationError, NashSolverError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
