"""Convergence records shared by every solver run, and their CSV form."""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.errors import NumericalError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["iteration", "sccp_index", "exploitability", "duality_gap", "wall_time_ns"]


@dataclass(frozen=True)
class ConvergenceRecord:
    total_iteration: int
    exploitability: float
    duality_gap: Optional[float] = None
    sccp_index: int = 0
    wall_time_ns: int = 0
    # True when the recorded profile is a running average rather than the last iterate
    averaged: bool = False


def default_eval_every(total_iterations):
    return max(1, int(total_iterations) // 1000)


@contextmanager
def at_iteration(iteration):
    """Tag a NumericalError raised inside a solver step with its total iteration."""
    try:
        yield
    except NumericalError as e:
        if e.iteration is not None:
            raise
        raise NumericalError(f"{e.detail} at iteration {iteration}", iteration=int(iteration)) from e


class RecordCollector:
    """Collects a record every `eval_every` total iterations."""

    def __init__(self, eval_every, record_wall_time=False):
        self.eval_every = max(1, int(eval_every))
        self.record_wall_time = record_wall_time
        self.records = []
        self._start = time.perf_counter_ns()

    def due(self, iteration):
        return iteration % self.eval_every == 0

    def add(self, iteration, exploitability, duality_gap=None, sccp_index=0, averaged=False):
        if not np.isfinite(exploitability) or (duality_gap is not None and not np.isfinite(duality_gap)):
            raise NumericalError(f"non-finite metric at iteration {iteration}", iteration=iteration)
        wall = time.perf_counter_ns() - self._start if self.record_wall_time else 0
        record = ConvergenceRecord(
            total_iteration=int(iteration),
            exploitability=float(exploitability),
            duality_gap=None if duality_gap is None else float(duality_gap),
            sccp_index=int(sccp_index),
            wall_time_ns=int(wall),
            averaged=averaged,
        )
        self.records.append(record)
        logger.debug(f"iteration={iteration} sccp={sccp_index} exploitability={exploitability:.6e}")
        return record


def records_to_frame(records):
    return pd.DataFrame(
        {
            "iteration": [r.total_iteration for r in records],
            "sccp_index": [r.sccp_index for r in records],
            "exploitability": [r.exploitability for r in records],
            "duality_gap": [np.nan if r.duality_gap is None else r.duality_gap for r in records],
            "wall_time_ns": [r.wall_time_ns for r in records],
        },
        columns=CSV_COLUMNS,
    )


def write_records_csv(records, path):
    """Write records with 17 significant digits; a missing duality gap is an empty field."""
    records_to_frame(records).to_csv(path, index=False, float_format="%.17g", na_rep="")
