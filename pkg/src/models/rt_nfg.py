"""Reward transformation on normal-form games.

Each SCCP (strongly convex-concave problem) is the base game plus a
mu-weighted regularizer anchored at a reference profile. The RT loop solves
a fixed budget of inner steps per SCCP, then moves the reference to the last
iterate while keeping the learners' state (warm start).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.errors import DimensionMismatchError, DomainError
from src.games.nfg import (
    MatrixGame,
    Profile,
    SimplexVector,
    check_player,
    exploitability,
    loss_gradient,
)
from src.models.minimizers import MinimizerConfig, MinimizerKind, SimplexLearner
from src.models.records import RecordCollector, at_iteration, default_eval_every

logger = logging.getLogger(__name__)


class Regularizer(str, Enum):
    EUCLIDEAN_BREGMAN = "EUCLIDEAN_BREGMAN"
    KL = "KL"
    REVERSE_ENTROPY = "REVERSE_ENTROPY"


class Averaging(str, Enum):
    NONE = "NONE"
    UNIFORM = "UNIFORM"
    LINEAR = "LINEAR"


def regularizer_gradient(kind, strategy, reference):
    """Gradient in the first argument of phi(sigma, sigma_r), on raw arrays."""
    kind = Regularizer(kind)
    if kind == Regularizer.EUCLIDEAN_BREGMAN:
        return strategy - reference
    if np.any(strategy <= 0.0):
        raise DomainError(f"{kind.value} regularizer needs an interior strategy")
    if kind == Regularizer.KL:
        return np.log(strategy) - np.log(reference) + 1.0
    return -reference / strategy


@dataclass(frozen=True, eq=False)
class SccpSpec:
    game: MatrixGame
    reference: Profile
    mu: float
    regularizer: Regularizer = Regularizer.EUCLIDEAN_BREGMAN
    index: int = 1

    def __post_init__(self):
        object.__setattr__(self, "regularizer", Regularizer(self.regularizer))
        if not self.mu >= 0:
            raise DomainError(f"mu must be nonnegative, got {self.mu!r}")
        if self.reference.p0.size != self.game.rows or self.reference.p1.size != self.game.cols:
            raise DimensionMismatchError("reference profile does not match the game")
        if self.regularizer != Regularizer.EUCLIDEAN_BREGMAN:
            if np.any(self.reference.p0.probs <= 0) or np.any(self.reference.p1.probs <= 0):
                raise DomainError(f"{self.regularizer.value} needs an interior reference")

    def with_reference(self, reference):
        return SccpSpec(self.game, reference, self.mu, self.regularizer, self.index + 1)


class RtRunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mu: float = Field(default=0.1, ge=0)
    inner_iterations: int = Field(default=10, ge=0)
    outer_iterations: int = Field(default=100, ge=0)
    alternating: bool = True
    eval_every: Optional[int] = Field(default=None, ge=1)
    # run label only; every solver here is deterministic and random games carry their own seed
    seed: int = 0
    # inner solves stop once the SCCP duality gap is below this threshold
    gap_threshold: Optional[float] = Field(default=None, gt=0)
    max_inner_iterations: int = Field(default=100_000, ge=1)
    record_wall_time: bool = False

    @property
    def total_iterations(self):
        return self.inner_iterations * self.outer_iterations

    def resolved_eval_every(self):
        return self.eval_every or default_eval_every(self.total_iterations)


def sccp_loss_gradient(spec, player, profile):
    """g_i + mu * grad phi(sigma_i, sigma_r_i)."""
    check_player(player)
    g = loss_gradient(spec.game, player, profile.side(1 - player))
    if spec.mu == 0:
        return g
    own = profile.side(player).probs
    return g + spec.mu * regularizer_gradient(spec.regularizer, own, spec.reference.side(player).probs)


def sccp_duality_gap(spec, profile):
    """max over deviations of 0.5 * sum_i <G_i, sigma_i - sigma'_i>; equals exploitability at mu = 0."""
    total = 0.0
    for player in (0, 1):
        grad = sccp_loss_gradient(spec, player, profile)
        total += grad @ profile.side(player).probs - grad.min()
    return max(0.5 * float(total), 0.0)


def random_reference(rows, cols, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    return Profile(SimplexVector(rng.dirichlet(np.ones(rows))), SimplexVector(rng.dirichlet(np.ones(cols))))


def exploitability_bound(game, saddle, profile):
    """exploitability(saddle) + L * ||saddle - profile||_2 with L = 0.5 * max|A| * sqrt(rows + cols)."""
    lipschitz = 0.5 * np.abs(game.payoff).max() * np.sqrt(game.rows + game.cols)
    d0 = saddle.p0.probs - profile.p0.probs
    d1 = saddle.p1.probs - profile.p1.probs
    return exploitability(game, saddle) + lipschitz * float(np.sqrt(d0 @ d0 + d1 @ d1))


def grid_saddle_point(spec, resolution=101):
    """Grid search of the SCCP saddle point of a 2x2 game by minimum duality gap."""
    if (spec.game.rows, spec.game.cols) != (2, 2):
        raise DimensionMismatchError("the grid oracle only handles 2x2 games")
    grid = np.linspace(0.0, 1.0, resolution)
    if spec.regularizer != Regularizer.EUCLIDEAN_BREGMAN:
        grid = grid[1:-1]
    best, best_gap = None, np.inf
    for p in grid:
        for q in grid:
            candidate = Profile.from_arrays([p, 1.0 - p], [q, 1.0 - q])
            gap = sccp_duality_gap(spec, candidate)
            if gap < best_gap:
                best, best_gap = candidate, gap
    return best


def _current_profile(learners):
    return Profile(learners[0].strategy, learners[1].strategy)


def _play_round(learners, loss_fn, alternating):
    """One self-play iteration.

    Alternating: player 0 updates against sigma_1^t, then player 1 against the
    fresh sigma_0^{t+1}. Simultaneous: both see the iteration-t profile.
    """
    profile = _current_profile(learners)
    if alternating:
        learners[0].observe(loss_fn(0, profile))
        learners[1].observe(loss_fn(1, _current_profile(learners)))
    else:
        losses = [loss_fn(0, profile), loss_fn(1, profile)]
        learners[0].observe(losses[0])
        learners[1].observe(losses[1])
    return _current_profile(learners)


def _rt_run(game, config, minimizer, regularizer, initial_profile, initial_reference, on_reference):
    profile = Profile.uniform(game) if initial_profile is None else initial_profile
    reference = Profile.uniform(game) if initial_reference is None else initial_reference
    spec = SccpSpec(game, reference, config.mu, regularizer)
    learners = [SimplexLearner(minimizer, profile.p0), SimplexLearner(minimizer, profile.p1)]
    collector = RecordCollector(config.resolved_eval_every(), config.record_wall_time)
    loss_fn = lambda player, current: sccp_loss_gradient(spec, player, current)  # noqa: E731

    total = 0
    for n in range(1, config.outer_iterations + 1):
        t = 0
        while True:
            if config.gap_threshold is not None:
                if t >= config.max_inner_iterations or sccp_duality_gap(spec, profile) <= config.gap_threshold:
                    break
            elif t >= config.inner_iterations:
                break
            t += 1
            total += 1
            with at_iteration(total):
                profile = _play_round(learners, loss_fn, config.alternating)
                if collector.due(total):
                    collector.add(total, exploitability(game, profile), sccp_duality_gap(spec, profile), n)
        # sigma^{r,n+1} <- sigma^{T+1,n}; learner state carries over
        spec = spec.with_reference(profile)
        if on_reference is not None:
            on_reference(n, profile)

    logger.info(
        f"RT run ({minimizer.kind.value}, {regularizer.value}) finished: {total} iterations, "
        f"exploitability={exploitability(game, profile):.3e}"
    )
    return profile, collector.records


def rtrm_plus_run(game, config, initial_profile=None, initial_reference=None, on_reference=None):
    """RTRM+: RM+ on each Euclidean-regularized SCCP with warm-started regrets.

    `on_reference(n, profile)` is called with the solution of SCCP n, which is
    the reference of SCCP n + 1.
    """
    minimizer = MinimizerConfig(kind=MinimizerKind.RM_PLUS)
    return _rt_run(game, config, minimizer, Regularizer.EUCLIDEAN_BREGMAN, initial_profile, initial_reference, on_reference)


def rt_mwu_run(
    game,
    config,
    regularizer=Regularizer.KL,
    learning_rate=0.5,
    optimistic=False,
    initial_profile=None,
    initial_reference=None,
    on_reference=None,
):
    """MWU (or OMWU) on the transformed loss; KL gives R-NaD, optimistic KL gives OR-NaD."""
    minimizer = MinimizerConfig(kind=MinimizerKind.MWU, learning_rate=learning_rate, optimistic=optimistic)
    return _rt_run(game, config, minimizer, Regularizer(regularizer), initial_profile, initial_reference, on_reference)


def baseline_selfplay_run(
    game,
    algorithm,
    iterations,
    alternating=True,
    averaging=Averaging.NONE,
    eval_every=None,
    record_wall_time=False,
):
    """Plain self-play of one simplex learner per player, with optional averaging.

    The recorded (and returned) profile is the last iterate for NONE, else the
    running average of the played profiles with weights 1 (UNIFORM) or t (LINEAR).
    """
    averaging = Averaging(averaging)
    averaged = averaging != Averaging.NONE
    if averaged and not algorithm.regret_based:
        logger.warning(f"Averaging {algorithm.kind.value} iterates; records are flagged as averaged")
    learners = [
        SimplexLearner(algorithm, SimplexVector.uniform(game.rows)),
        SimplexLearner(algorithm, SimplexVector.uniform(game.cols)),
    ]
    collector = RecordCollector(eval_every or default_eval_every(iterations), record_wall_time)
    loss_fn = lambda player, current: loss_gradient(game, player, current.side(1 - player))  # noqa: E731

    sums = [np.zeros(game.rows), np.zeros(game.cols)]
    profile = _current_profile(learners)
    designated = profile
    for t in range(1, iterations + 1):
        weight = float(t) if averaging == Averaging.LINEAR else 1.0
        played = profile
        with at_iteration(t):
            profile = _play_round(learners, loss_fn, alternating)
            if averaged:
                sums[0] += weight * played.p0.probs
                sums[1] += weight * played.p1.probs
                designated = Profile(SimplexVector.from_weights(sums[0]), SimplexVector.from_weights(sums[1]))
            else:
                designated = profile
            if collector.due(t):
                collector.add(t, exploitability(game, designated), averaged=averaged)
    return designated, collector.records


def sccp_selfplay_run(
    spec,
    algorithm,
    iterations,
    alternating=True,
    gap_threshold=None,
    eval_every=1,
    initial_profile=None,
):
    """Solve one SCCP with a fixed reference; records carry the duality gap."""
    profile = Profile.uniform(spec.game) if initial_profile is None else initial_profile
    learners = [SimplexLearner(algorithm, profile.p0), SimplexLearner(algorithm, profile.p1)]
    collector = RecordCollector(eval_every)
    loss_fn = lambda player, current: sccp_loss_gradient(spec, player, current)  # noqa: E731

    for t in range(1, iterations + 1):
        with at_iteration(t):
            profile = _play_round(learners, loss_fn, alternating)
            gap = None
            if gap_threshold is not None or collector.due(t):
                gap = sccp_duality_gap(spec, profile)
            if collector.due(t):
                collector.add(t, exploitability(spec.game, profile), gap, spec.index)
        if gap_threshold is not None and gap <= gap_threshold:
            break
    return profile, collector.records
