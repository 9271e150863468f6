"""Command line entry point.

    python -m src.harness.main solve --config configs/rtcfr_plus_kuhn.json --svg
    python -m src.harness.main sweep --configs "configs/rtrm_plus_5x5_seed*.json"
    python -m src.harness.main dump-game --game goofspiel:4
"""

import argparse
import json
import logging
import sys

from src.errors import EquilibrateError, NumericalError
from src.games.make_game import make_game, parse_game_spec
from src.harness.config import LOG_LEVEL, load_config
from src.harness.runner import output_dir, run
from src.harness.sweep import load_configs, sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser():
    parser = argparse.ArgumentParser(prog="equilibrate", description="Equilibrium solvers for two-player zero-sum games")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one experiment config")
    solve.add_argument("--config", required=True)
    solve.add_argument("--out")
    solve.add_argument("--svg", action="store_true", help="also write curve.svg")
    solve.add_argument("--print-config", action="store_true", help="echo the effective config and exit")
    solve.add_argument("--algorithm")
    solve.add_argument("--total-iterations", type=int)
    solve.add_argument("--inner-iterations", type=int)
    solve.add_argument("--outer-iterations", type=int)
    solve.add_argument("--mu", type=float)
    solve.add_argument("--learning-rate", type=float)
    solve.add_argument("--eval-every", type=int)
    solve.add_argument("--seed", type=int)

    many = sub.add_parser("sweep", help="run every config matching a glob")
    many.add_argument("--configs", required=True)
    many.add_argument("--out")
    many.add_argument("--threads", type=int)
    many.add_argument("--svg", action="store_true")

    dump = sub.add_parser("dump-game", help="print a game as JSON")
    dump.add_argument("--game", required=True, help="kuhn, leduc, goofspiel:4, liars_dice:2, random_nfg:5x5:0, matrix:<file>")
    dump.add_argument("--out")
    return parser


def _overrides(args):
    return {
        "algorithm": args.algorithm,
        "total_iterations": args.total_iterations,
        "inner_iterations": args.inner_iterations,
        "outer_iterations": args.outer_iterations,
        "mu": args.mu,
        "learning_rate": args.learning_rate,
        "eval_every": args.eval_every,
        "seed": args.seed,
    }


def _banner(title, lines):
    print("=" * 70)
    print(title)
    print("=" * 70)
    for line in lines:
        print(f"   {line}")


def cmd_solve(args):
    config = load_config(args.config, _overrides(args))
    if args.print_config:
        print(config.to_json())
        return EXIT_OK
    out = output_dir(config, args.out)
    result = run(config, out=out, svg=args.svg)
    _banner(
        f"{config.algorithm.value} on {config.game.label()}",
        [
            f"iterations: {config.iterations}",
            f"records: {len(result.records)}",
            f"final exploitability: {result.final_exploitability:.6e}",
            f"output: {out}",
        ],
    )
    return EXIT_OK


def cmd_sweep(args):
    configs = load_configs(args.configs)
    summary = sweep(configs, out_root=args.out, threads=args.threads, svg=args.svg)
    _banner(f"Sweep of {len(summary)} runs", [f"{r.run}: {r.final_exploitability:.6e}" for r in summary.itertuples()])
    return EXIT_OK


def cmd_dump_game(args):
    game = make_game(parse_game_spec(args.game))
    text = game.to_json()
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        print(text)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "dump-game": cmd_dump_game}


def _report(error):
    print(json.dumps(error.to_dict()), file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NumericalError as e:
        logger.error(f"Numerical failure at iteration {e.iteration}: {e.detail}")
        _report(e)
        return EXIT_NUMERICAL
    except EquilibrateError as e:
        _report(e)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
