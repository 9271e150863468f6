"""Run one experiment: build the game, dispatch the algorithm, write the outputs."""

import json
import logging
import os
from dataclasses import dataclass

from src.errors import ConfigError
from src.games.efg import TreeGame, embed_matrix_game, exploitability_efg, matrix_from_embedding
from src.games.make_game import make_game
from src.games.nfg import MatrixGame, exploitability
from src.harness.config import MATRIX_ALGORITHMS, OUTPUT_DIR, Algorithm
from src.models.cfr import cfr_run, rt_mwu_efg_run, rtcfr_plus_run
from src.models.dogda import DilatedNorm, dogda_run
from src.models.minimizers import MinimizerConfig, MinimizerKind
from src.models.records import write_records_csv
from src.models.rt_nfg import Regularizer, RtRunConfig, baseline_selfplay_run, rt_mwu_run, rtrm_plus_run
from src.visualization.visualize import write_curve_svg

logger = logging.getLogger(__name__)

SELFPLAY_KINDS = {
    Algorithm.RM: (MinimizerKind.RM, False),
    Algorithm.RM_PLUS: (MinimizerKind.RM_PLUS, False),
    Algorithm.MWU: (MinimizerKind.MWU, False),
    Algorithm.OMWU: (MinimizerKind.MWU, True),
    Algorithm.GDA: (MinimizerKind.GDA, False),
    Algorithm.OGDA: (MinimizerKind.GDA, True),
}


@dataclass
class RunResult:
    config: object
    game: object
    profile: object
    records: list

    @property
    def final_exploitability(self):
        if isinstance(self.game, MatrixGame):
            return exploitability(self.game, self.profile)
        return exploitability_efg(self.game, self.profile)


def prepare_game(config):
    """Game in the form the algorithm needs; matrix games are embedded for tree algorithms."""
    game = make_game(config.game)
    if config.algorithm in MATRIX_ALGORITHMS:
        return matrix_from_embedding(game) if isinstance(game, TreeGame) else game
    if config.algorithm in (Algorithm.RT_MWU, Algorithm.RT_OMWU):
        return game
    return embed_matrix_game(game) if isinstance(game, MatrixGame) else game


def _rt_config(config):
    return RtRunConfig(
        mu=config.mu,
        inner_iterations=config.inner_iterations,
        outer_iterations=config.outer_iterations,
        alternating=config.alternating,
        eval_every=config.resolved_eval_every(),
        seed=config.seed,
        gap_threshold=config.gap_threshold,
        record_wall_time=config.record_wall_time,
    )


def execute(config):
    """Run the configured algorithm without touching the filesystem."""
    game = prepare_game(config)
    algorithm = config.algorithm
    eval_every = config.resolved_eval_every()
    logger.info(f"Running {algorithm.value} on {config.game.label()} for {config.iterations} iterations")

    if algorithm in SELFPLAY_KINDS:
        kind, optimistic = SELFPLAY_KINDS[algorithm]
        rate = config.step_size if kind in (MinimizerKind.MWU, MinimizerKind.GDA) else None
        minimizer = MinimizerConfig(kind=kind, learning_rate=rate, optimistic=optimistic)
        profile, records = baseline_selfplay_run(
            game, minimizer, config.iterations, config.alternating, config.averaging, eval_every, config.record_wall_time
        )
    elif algorithm == Algorithm.RTRM_PLUS:
        profile, records = rtrm_plus_run(game, _rt_config(config))
    elif algorithm in (Algorithm.RT_MWU, Algorithm.RT_OMWU):
        optimistic = algorithm == Algorithm.RT_OMWU
        regularizer = config.regularizer or Regularizer.KL
        run = rt_mwu_run if isinstance(game, MatrixGame) else rt_mwu_efg_run
        profile, records = run(
            game, _rt_config(config), regularizer=regularizer, learning_rate=config.step_size, optimistic=optimistic
        )
    elif algorithm in (Algorithm.CFR, Algorithm.CFR_PLUS):
        profile, _, records = cfr_run(
            game,
            config.iterations,
            plus=algorithm == Algorithm.CFR_PLUS,
            alternating=config.alternating,
            eval_every=eval_every,
            record_wall_time=config.record_wall_time,
        )
    elif algorithm == Algorithm.RTCFR_PLUS:
        profile, records = rtcfr_plus_run(game, _rt_config(config), rt_reach=config.rt_reach)
    elif algorithm == Algorithm.DOGDA:
        norm = DilatedNorm.uniform(game, config.beta)
        profile, records = dogda_run(game, config.step_size, config.iterations, norm, eval_every, config.record_wall_time)
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}", code="UNKNOWN_ALGORITHM")
    return RunResult(config, game, profile, records)


def output_dir(config, out=None):
    return out or config.output or os.path.join(OUTPUT_DIR, config.run_name())


def write_outputs(result, out, svg=False):
    os.makedirs(out, exist_ok=True)
    write_records_csv(result.records, os.path.join(out, "records.csv"))
    payload = {
        "algorithm": result.config.algorithm.value,
        "game": result.config.game.label(),
        "exploitability": result.final_exploitability,
        "profile": result.profile.to_dict(),
    }
    with open(os.path.join(out, "final_profile.json"), "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    with open(os.path.join(out, "config.json"), "w") as f:
        f.write(result.config.to_json())
    if svg:
        write_curve_svg(result.records, os.path.join(out, "curve.svg"), title=result.config.run_name())
    logger.info(f"Wrote {len(result.records)} records to {out}")


def run(config, out=None, svg=False):
    result = execute(config)
    write_outputs(result, output_dir(config, out), svg)
    return result
