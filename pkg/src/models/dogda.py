"""Dilated optimistic gradient descent-ascent (DOGDA) over the treeplex.

Each player's sequence-form loss is taken through one optimistic proximal
step under the dilated Euclidean distance. The step decomposes into
per-infoset simplex projections solved bottom-up: an infoset's projected
point needs the optimal values of the infosets below each of its actions.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.errors import DimensionMismatchError, DomainError
from src.games.efg import BehaviorProfile, exploitability_efg, terminal_sequence_utilities
from src.models.records import RecordCollector, at_iteration, default_eval_every

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DilatedNorm:
    """Per-infoset weights beta_I of the dilated Euclidean norm, one array per player."""

    betas: tuple

    def __post_init__(self):
        fixed = []
        for b in self.betas:
            arr = np.array(b, dtype=float)
            if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
                raise DomainError("dilated norm weights must be positive")
            arr.setflags(write=False)
            fixed.append(arr)
        object.__setattr__(self, "betas", tuple(fixed))

    @classmethod
    def uniform(cls, game, beta=1.0):
        return cls(tuple(np.full(game.num_infosets(p), float(beta)) for p in (0, 1)))


@dataclass(frozen=True, eq=False)
class DogdaState:
    current: BehaviorProfile
    last_loss: tuple = (None, None)
    iteration: int = 0

    @classmethod
    def initial(cls, game, profile=None):
        return cls(BehaviorProfile.uniform(game) if profile is None else profile)


def sequence_form_loss(game, profile, player):
    """l_i(s) = -sum over terminals z with last own sequence s of pi_-i(z) * u_i(z)."""
    return -terminal_sequence_utilities(game, profile, player)[:-1]


def segment_simplex_project(values, starts):
    """Project every segment values[starts[k]:starts[k+1]] onto its simplex."""
    n = values.size
    sizes = np.diff(np.append(starts, n))
    segment = np.repeat(np.arange(starts.size), sizes)
    order = np.lexsort((-values, segment))
    u = values[order]
    running = np.cumsum(u)
    before = np.repeat(running[starts] - u[starts], sizes)
    css = running - before
    k = np.arange(n) - np.repeat(starts, sizes) + 1
    support = u - (css - 1.0) / k > 0
    rho = np.maximum.reduceat(np.where(support, k, 0), starts)
    theta = (css[starts + rho - 1] - 1.0) / rho
    return np.maximum(values - np.repeat(theta, sizes), 0.0)


def dilated_prox_step(game, player, strategy, loss, norm, learning_rate):
    """argmin over the treeplex of <eta * loss, x> + D(x, x_hat), in behavioral form."""
    betas = norm.betas[player]
    if betas.size != game.num_infosets(player):
        raise DimensionMismatchError("dilated norm does not match the game")
    sizes = game.num_actions[player]
    half_sq = 0.5 * game.segment_sums(player, strategy**2)
    below = np.zeros(game.num_sequences[player] + 1)
    updated = np.zeros(game.num_sequences[player])
    for level in reversed(game.own_levels[player]):
        infosets = level.infosets
        beta = betas[infosets]
        beta_seq = np.repeat(beta, sizes[infosets])
        current = strategy[level.seqs]
        linear = learning_rate * loss[level.seqs] + below[level.seqs]
        projected = segment_simplex_project(current - linear / beta_seq, level.starts)
        shifted = linear - beta_seq * current
        value = np.add.reduceat(shifted * projected, level.starts) + 0.5 * beta * np.add.reduceat(projected**2, level.starts)
        np.add.at(below, game.parent_seq[player][infosets], value + beta * half_sq[infosets])
        updated[level.seqs] = projected
    return updated


def dogda_iteration(game, state, norm, learning_rate):
    """Simultaneous optimistic step for both players with loss 2 * l_t - l_{t-1}."""
    if learning_rate < 0:
        raise DomainError(f"learning rate must be nonnegative, got {learning_rate!r}")
    played = state.current
    losses, strategies = [], []
    for player in (0, 1):
        loss = sequence_form_loss(game, played, player)
        previous = loss if state.last_loss[player] is None else state.last_loss[player]
        strategies.append(dilated_prox_step(game, player, played.side(player), 2.0 * loss - previous, norm, learning_rate))
        losses.append(loss)
    return DogdaState(BehaviorProfile(game, tuple(strategies)), tuple(losses), state.iteration + 1)


def dogda_run(game, learning_rate, iterations, norm=None, eval_every=None, record_wall_time=False):
    norm = DilatedNorm.uniform(game) if norm is None else norm
    state = DogdaState.initial(game)
    collector = RecordCollector(eval_every or default_eval_every(iterations), record_wall_time)
    for t in range(1, iterations + 1):
        with at_iteration(t):
            state = dogda_iteration(game, state, norm, learning_rate)
            if collector.due(t):
                collector.add(t, exploitability_efg(game, state.current))
    logger.info(f"DOGDA on {game.name}: {iterations} iterations, exploitability={exploitability_efg(game, state.current):.3e}")
    return state.current, collector.records
