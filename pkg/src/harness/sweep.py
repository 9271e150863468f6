"""Run a list of experiments on a bounded worker pool and summarize them."""

import glob
import logging
import os

import pandas as pd
from joblib import Parallel, delayed

from src.errors import ConfigError, EquilibrateError, NumericalError
from src.harness.config import OUTPUT_DIR, THREADS, load_config
from src.harness.runner import run
from src.models.diagnostics import decay_rate

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["run", "algorithm", "game", "seed", "iterations", "final_exploitability", "decay_rate", "status"]
# status of a run that died on an unexpected exception
RUN_FAILED = "RUN_FAILED"


def load_configs(pattern):
    paths = sorted(glob.glob(pattern))
    return [load_config(p) for p in paths]


def _run_one(index, config, out_root, svg):
    name = f"{index:03d}_{config.run_name()}"
    row = {
        "run": name,
        "algorithm": config.algorithm.value,
        "game": config.game.label(),
        "seed": config.seed,
        "iterations": config.iterations,
        "final_exploitability": float("nan"),
        "decay_rate": float("nan"),
        "status": "ok",
    }
    try:
        result = run(config, out=os.path.join(out_root, name), svg=svg)
        row["final_exploitability"] = result.final_exploitability
        row["decay_rate"] = decay_rate(result.records)
        return row, None
    except EquilibrateError as e:
        logger.error(f"Run {name} failed: {e.code} {e.detail}")
        row["status"] = e.code
        return row, e.to_dict()
    except Exception as e:
        logger.exception(f"Run {name} crashed")
        row["status"] = RUN_FAILED
        return row, {"error": RUN_FAILED, "detail": f"{type(e).__name__}: {e}"}


def sweep(configs, out_root=None, threads=None, svg=False):
    """Run every config; summary rows keep config order. The first failure is raised after all runs finish."""
    if not configs:
        raise ConfigError("a sweep needs at least one config", code="EMPTY_SWEEP")
    out_root = out_root or OUTPUT_DIR
    os.makedirs(out_root, exist_ok=True)
    workers = max(1, threads or THREADS)
    logger.info(f"Sweeping {len(configs)} configs on {workers} worker(s)")
    results = Parallel(n_jobs=workers, prefer="threads")(
        delayed(_run_one)(i, config, out_root, svg) for i, config in enumerate(configs)
    )
    summary = pd.DataFrame([row for row, _ in results], columns=SUMMARY_COLUMNS)
    summary.to_csv(os.path.join(out_root, "summary.csv"), index=False, float_format="%.17g")

    failures = [error for _, error in results if error is not None]
    if failures:
        first = failures[0]
        if first["error"] == NumericalError.code:
            raise NumericalError(first["detail"], iteration=first.get("iteration"))
        if first["error"] == RUN_FAILED:
            raise EquilibrateError(first["detail"], code=RUN_FAILED)
        raise ConfigError(first["detail"], code=first["error"])
    return summary
