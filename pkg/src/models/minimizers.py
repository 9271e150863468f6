"""Single-simplex online learners.

RM and RM+ accumulate regrets against a value (reward) vector; MWU and
projected GDA step against a loss vector. The optimistic variants use the
previous loss as a prediction of the next one.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.errors import DimensionMismatchError, DomainError
from src.games.nfg import SimplexVector, as_finite_vector

# MWU keeps iterates interior; probabilities are floored here before renormalizing
MWU_FLOOR = 1e-200


class MinimizerKind(str, Enum):
    RM = "RM"
    RM_PLUS = "RM_PLUS"
    MWU = "MWU"
    GDA = "GDA"


class MinimizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: MinimizerKind
    learning_rate: Optional[float] = None
    optimistic: bool = False

    @model_validator(mode="after")
    def _check_learning_rate(self):
        if self.kind in (MinimizerKind.MWU, MinimizerKind.GDA):
            if self.learning_rate is None or self.learning_rate <= 0:
                raise ValueError(f"{self.kind.value} needs a positive learning_rate")
        elif self.optimistic:
            raise ValueError("optimistic updates are only defined for MWU and GDA")
        return self

    @property
    def regret_based(self):
        return self.kind in (MinimizerKind.RM, MinimizerKind.RM_PLUS)


@dataclass(frozen=True, eq=False)
class RegretState:
    """Accumulated regrets Q, the stored loss prediction and the step counter."""

    cum_regret: np.ndarray
    last_loss: Optional[np.ndarray] = None
    iteration: int = 0

    @classmethod
    def zeros(cls, size):
        return cls(np.zeros(size))

    @classmethod
    def initial(cls, strategy):
        """Seed Q with the initial strategy, so the induced strategy is that strategy."""
        return cls(np.array(strategy.probs, dtype=float))

    @property
    def size(self):
        return self.cum_regret.size

    def strategy(self):
        return SimplexVector.from_weights(np.maximum(self.cum_regret, 0.0))


def _instantaneous_regret(state, value_vector, current):
    q = as_finite_vector(value_vector, "value vector")
    if q.size != state.size or current.size != state.size:
        raise DimensionMismatchError(
            f"regret state has {state.size} actions, value vector {q.size}, strategy {current.size}"
        )
    return q - current.probs @ q


def rm_plus_step(state, value_vector, current):
    if np.any(state.cum_regret < 0):
        raise DomainError("RM+ regrets must be nonnegative")
    r = _instantaneous_regret(state, value_vector, current)
    cum = np.maximum(state.cum_regret + r, 0.0)
    return RegretState(cum, state.last_loss, state.iteration + 1), SimplexVector.from_weights(cum)


def rm_step(state, value_vector, current):
    r = _instantaneous_regret(state, value_vector, current)
    cum = state.cum_regret + r
    return RegretState(cum, state.last_loss, state.iteration + 1), SimplexVector.from_weights(np.maximum(cum, 0.0))


def _effective_loss(loss, prediction, size):
    g = as_finite_vector(loss, "loss")
    if g.size != size:
        raise DimensionMismatchError(f"loss has {g.size} entries, strategy has {size}")
    if prediction is None:
        return g
    m = as_finite_vector(prediction, "prediction")
    if m.size != size:
        raise DimensionMismatchError(f"prediction has {m.size} entries, strategy has {size}")
    return 2.0 * g - m


def mwu_step(current, loss, learning_rate, prediction=None):
    if learning_rate <= 0:
        raise DomainError(f"learning rate must be positive, got {learning_rate!r}")
    if np.any(current.probs <= 0.0):
        raise DomainError("MWU needs a strictly positive strategy")
    g = _effective_loss(loss, prediction, current.size)
    logits = np.log(current.probs) - learning_rate * g
    weights = np.exp(logits - logits.max())
    weights /= weights.sum()
    weights = np.maximum(weights, MWU_FLOOR)
    return SimplexVector(weights / weights.sum())


def simplex_project(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    x = as_finite_vector(v)
    if x.size == 0:
        raise DomainError("cannot project an empty vector")
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, x.size + 1)
    support = u - css / k > 0
    rho = k[support][-1]
    theta = css[support][-1] / rho
    return SimplexVector(np.maximum(x - theta, 0.0))


def gda_step(current, loss, learning_rate, prediction=None):
    if learning_rate < 0:
        raise DomainError(f"learning rate must be nonnegative, got {learning_rate!r}")
    g = _effective_loss(loss, prediction, current.size)
    return simplex_project(current.probs - learning_rate * g)


def omd_rm_plus_step(theta, value_vector, learning_rate):
    """RM+ written as online mirror descent on the nonnegative orthant.

    theta' = max(theta + eta * m, 0) with m = q - <theta/|theta|_1, q>.
    """
    t = as_finite_vector(theta, "theta")
    if np.any(t < 0):
        raise DomainError("theta must be nonnegative")
    total = t.sum()
    if total <= 0:
        raise DomainError("theta must have positive mass")
    q = as_finite_vector(value_vector, "value vector")
    if q.size != t.size:
        raise DimensionMismatchError(f"theta has {t.size} entries, value vector {q.size}")
    m = q - (t / total) @ q
    return np.maximum(t + learning_rate * m, 0.0)


class SimplexLearner:
    """One player's learner in self-play: strategy plus learner state."""

    def __init__(self, config, initial):
        self.config = config
        self.strategy = initial
        self.state = RegretState.initial(initial) if config.regret_based else RegretState.zeros(initial.size)

    def observe(self, loss):
        """Update against a loss vector and return the next strategy."""
        loss = as_finite_vector(loss, "loss")
        kind = self.config.kind
        if kind == MinimizerKind.RM_PLUS:
            self.state, self.strategy = rm_plus_step(self.state, -loss, self.strategy)
            return self.strategy
        if kind == MinimizerKind.RM:
            self.state, self.strategy = rm_step(self.state, -loss, self.strategy)
            return self.strategy

        prediction = None
        if self.config.optimistic:
            prediction = loss if self.state.last_loss is None else self.state.last_loss
        step = mwu_step if kind == MinimizerKind.MWU else gda_step
        self.strategy = step(self.strategy, loss, self.config.learning_rate, prediction)
        self.state = RegretState(self.state.cum_regret, loss, self.state.iteration + 1)
        return self.strategy
