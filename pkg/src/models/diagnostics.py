"""Convergence-rate fits on run records."""

from collections import namedtuple

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

# Metrics at or below this are clipped before taking logs
LOG_FLOOR = 1e-300

DecayFit = namedtuple("DecayFit", ["slope", "intercept", "r2"])


def fit_log_decay(iterations, values):
    """Least-squares line through (iteration, log10 value)."""
    x = np.asarray(iterations, dtype=float).reshape(-1, 1)
    y = np.log10(np.maximum(np.asarray(values, dtype=float), LOG_FLOOR))
    if x.shape[0] < 2:
        return DecayFit(float("nan"), float("nan"), float("nan"))
    model = LinearRegression().fit(x, y)
    return DecayFit(float(model.coef_[0]), float(model.intercept_), float(r2_score(y, model.predict(x))))


def decay_rate(records, metric="exploitability", tail_fraction=0.5):
    """Slope of log10 metric per iteration over the last `tail_fraction` of the records."""
    rows = [r for r in records if getattr(r, metric) is not None]
    tail = rows[int(len(rows) * (1.0 - tail_fraction)) :]
    return fit_log_decay([r.total_iteration for r in tail], [getattr(r, metric) for r in tail]).slope
