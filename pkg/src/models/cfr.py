"""Counterfactual-regret solvers on tree games: CFR, CFR+ and RTCFR+.

Every player-i infoset runs its own local learner on counterfactual values.
RTCFR+ adds the reward-transformation correction mu * (sigma_r - sigma) on
player i's edges, propagated up the tree in the same bottom-up pass that
computes the values, and moves the reference to the current profile every
`inner_iterations` iterations while the regrets carry over.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from src.errors import ConfigError, DomainError
from src.games.efg import (
    BehaviorProfile,
    edge_probabilities,
    exploitability_efg,
    node_values,
    normalize_weights,
    opponent_reach,
    reach_probabilities,
    realization_plan,
)
from src.models.minimizers import MWU_FLOOR
from src.models.records import RecordCollector, at_iteration, default_eval_every
from src.models.rt_nfg import Regularizer

logger = logging.getLogger(__name__)


class RtReach(str, Enum):
    # path weights of the descendant correction: every player and chance, or player i only
    FULL = "full"
    SELF_ONLY = "self_only"


class LocalLearner(str, Enum):
    RM_PLUS = "RM_PLUS"
    MWU = "MWU"


# ======================================================================
# Tree passes
# ======================================================================


def transformed_counterfactual_values(game, profile, player, correction=None, rt_reach=RtReach.FULL):
    """q(I, a) = sum_h pi_-i(h) * q(h, a) over player `player`'s sequences.

    Without a correction q(h, a) is the expected utility after ha. With a
    per-sequence correction c, q(h, a) = v(ha) + c(I, a) + R(ha), where R sums
    the corrections of player `player`'s edges below ha weighted by their path
    probability.
    """
    edge = edge_probabilities(game, profile)
    values = node_values(game, edge, player)
    opp = opponent_reach(reach_probabilities(game, profile), player)
    kids = game.own_edges[player]
    seqs = game.edge_seq[kids]
    per_history = values[kids]

    if correction is not None:
        local = np.zeros(game.num_nodes)
        local[kids] = correction[seqs]
        if RtReach(rt_reach) == RtReach.FULL:
            weights = edge
        else:
            weights = np.ones(game.num_nodes)
            weights[kids] = edge[kids]
        below = np.zeros(game.num_nodes)
        for start, end in reversed(game.levels[1:]):
            np.add.at(below, game.parent[start:end], weights[start:end] * (below[start:end] + local[start:end]))
        per_history = per_history + local[kids] + below[kids]

    q = np.zeros(game.num_sequences[player])
    np.add.at(q, seqs, opp[game.parent[kids]] * per_history)
    return q


def counterfactual_values(game, profile, player):
    return transformed_counterfactual_values(game, profile, player)


def split_by_infoset(game, player, flat):
    """Per-infoset views of a flat per-sequence array."""
    return [flat[o : o + k] for o, k in zip(game.offsets[player], game.num_actions[player])]


def regret_matching_update(game, player, regrets, strategy, q, plus=True):
    """Local RM (or RM+) step at every infoset; returns (regrets, strategy)."""
    expected = game.segment_sums(player, strategy * q)[game.seq_infoset[player]]
    cumulative = regrets + q - expected
    if plus:
        cumulative = np.maximum(cumulative, 0.0)
    return cumulative, normalize_weights(game, player, np.maximum(cumulative, 0.0))


def multiplicative_weights_update(game, player, strategy, q, learning_rate):
    """sigma'(I, .) proportional to sigma(I, .) * exp(eta * q(I, .)) at every infoset."""
    if np.any(strategy <= 0.0):
        raise DomainError("MWU needs strictly positive strategies")
    logits = np.log(strategy) + learning_rate * q
    if game.num_sequences[player] == 0:
        return strategy
    peak = np.maximum.reduceat(logits, game.offsets[player])[game.seq_infoset[player]]
    weights = np.maximum(normalize_weights(game, player, np.exp(logits - peak)), MWU_FLOOR)
    return normalize_weights(game, player, weights)


def _rt_correction(regularizer, mu, strategy, reference):
    if regularizer == Regularizer.EUCLIDEAN_BREGMAN:
        return mu * (reference - strategy)
    # KL without its +1: constant per infoset, it would otherwise penalize long own paths
    return mu * (np.log(reference) - np.log(strategy))


# ======================================================================
# CFR / CFR+
# ======================================================================


@dataclass(frozen=True, eq=False)
class CfrState:
    current: BehaviorProfile
    regrets: tuple
    average_weights: tuple
    iteration: int = 0
    plus: bool = True
    alternating: bool = True
    linear_averaging: bool = True

    @classmethod
    def initial(cls, game, plus=True, alternating=True, linear_averaging=True, profile=None):
        """Regrets are seeded with the initial strategy, which leaves it unchanged."""
        profile = BehaviorProfile.uniform(game) if profile is None else profile
        regrets = tuple(np.array(profile.side(p), dtype=float) for p in (0, 1))
        weights = tuple(np.zeros(game.num_sequences[p]) for p in (0, 1))
        return cls(profile, regrets, weights, 0, plus, alternating, linear_averaging)

    def average(self):
        if self.iteration == 0:
            return self.current
        game = self.current.game
        return BehaviorProfile.from_weights(game, *self.average_weights)


def _accumulate_average(game, state, played, iteration):
    weight = float(iteration) if state.linear_averaging else 1.0
    sums = []
    for p in (0, 1):
        strategy = played.side(p)
        plan = realization_plan(game, p, strategy)
        own_reach = plan[game.parent_seq[p]][game.seq_infoset[p]]
        sums.append(state.average_weights[p] + weight * own_reach * strategy)
    return tuple(sums)


def cfr_iteration(game, state):
    """One CFR(+) iteration; player 1 sees player 0's fresh strategy when alternating."""
    t = state.iteration + 1
    played = state.current
    profile = played
    regrets = list(state.regrets)
    for player in (0, 1):
        source = profile if state.alternating else played
        q = counterfactual_values(game, source, player)
        regrets[player], strategy = regret_matching_update(
            game, player, regrets[player], played.side(player), q, state.plus
        )
        profile = profile.replace(player, strategy)
    return replace(
        state,
        current=profile,
        regrets=tuple(regrets),
        average_weights=_accumulate_average(game, state, played, t),
        iteration=t,
    )


def cfr_run(
    game,
    iterations,
    plus=True,
    alternating=True,
    linear_averaging=None,
    eval_every=None,
    record_wall_time=False,
):
    """Run CFR (plus=False) or CFR+; records track the average strategy.

    Returns (average profile, current profile, records). Linear averaging
    defaults to on for CFR+ and off for CFR.
    """
    linear = plus if linear_averaging is None else linear_averaging
    state = CfrState.initial(game, plus=plus, alternating=alternating, linear_averaging=linear)
    collector = RecordCollector(eval_every or default_eval_every(iterations), record_wall_time)
    for t in range(1, iterations + 1):
        with at_iteration(t):
            state = cfr_iteration(game, state)
            if collector.due(t):
                collector.add(t, exploitability_efg(game, state.average()), averaged=True)
    name = "CFR+" if plus else "CFR"
    final = exploitability_efg(game, state.average())
    logger.info(f"{name} on {game.name}: {iterations} iterations, average exploitability={final:.3e}")
    return state.average(), state.current, collector.records


# ======================================================================
# RTCFR+
# ======================================================================


@dataclass(frozen=True, eq=False)
class RtcfrState:
    cfr: CfrState
    reference: BehaviorProfile
    mu: float
    inner_iterations: int
    sccp_index: int = 1
    inner_counter: int = 0
    rt_reach: RtReach = RtReach.FULL
    local: LocalLearner = LocalLearner.RM_PLUS
    regularizer: Regularizer = Regularizer.EUCLIDEAN_BREGMAN
    learning_rate: Optional[float] = None
    optimistic: bool = False
    last_values: tuple = (None, None)

    def __post_init__(self):
        if self.mu < 0:
            raise DomainError(f"mu must be nonnegative, got {self.mu!r}")
        if self.local == LocalLearner.MWU and not (self.learning_rate and self.learning_rate > 0):
            raise DomainError("MWU local learners need a positive learning rate")
        if self.regularizer == Regularizer.REVERSE_ENTROPY:
            raise DomainError("tree games support the EUCLIDEAN_BREGMAN and KL regularizers")
        if self.regularizer == Regularizer.KL and self.local == LocalLearner.RM_PLUS:
            raise DomainError("the KL correction needs interior strategies; use MWU local learners")

    @classmethod
    def initial(cls, game, mu, inner_iterations, alternating=True, profile=None, reference=None, **options):
        cfr = CfrState.initial(game, plus=True, alternating=alternating, linear_averaging=False, profile=profile)
        reference = BehaviorProfile.uniform(game) if reference is None else reference
        return cls(cfr, reference, mu, inner_iterations, **options)

    @property
    def current(self):
        return self.cfr.current


def rtcfr_plus_iteration(game, state):
    """One inner iteration of RTCFR+ (or RT with MWU local learners).

    When the inner counter reaches `inner_iterations` the reference becomes
    the current profile and the SCCP index advances; regrets are kept.
    """
    cfr = state.cfr
    played = cfr.current
    profile = played
    regrets = list(cfr.regrets)
    last_values = list(state.last_values)
    for player in (0, 1):
        source = profile if cfr.alternating else played
        own = played.side(player)
        correction = None
        if state.mu > 0:
            correction = _rt_correction(state.regularizer, state.mu, own, state.reference.side(player))
        q = transformed_counterfactual_values(game, source, player, correction, state.rt_reach)
        if state.local == LocalLearner.RM_PLUS:
            regrets[player], strategy = regret_matching_update(game, player, regrets[player], own, q, plus=True)
        else:
            effective = q
            if state.optimistic:
                previous = q if last_values[player] is None else last_values[player]
                effective = 2.0 * q - previous
            strategy = multiplicative_weights_update(game, player, own, effective, state.learning_rate)
            last_values[player] = q
        profile = profile.replace(player, strategy)

    cfr = replace(cfr, current=profile, regrets=tuple(regrets), iteration=cfr.iteration + 1)
    counter = state.inner_counter + 1
    reference, index = state.reference, state.sccp_index
    if counter >= state.inner_iterations:
        reference, index, counter = profile, index + 1, 0
    return replace(state, cfr=cfr, reference=reference, sccp_index=index, inner_counter=counter, last_values=tuple(last_values))


def _rt_tree_run(game, config, options, initial_profile, initial_reference):
    if config.gap_threshold is not None:
        raise ConfigError("gap_threshold is only supported on matrix games")
    state = RtcfrState.initial(
        game,
        config.mu,
        config.inner_iterations,
        alternating=config.alternating,
        profile=initial_profile,
        reference=initial_reference,
        **options,
    )
    collector = RecordCollector(config.resolved_eval_every(), config.record_wall_time)
    for t in range(1, config.total_iterations + 1):
        index = state.sccp_index
        with at_iteration(t):
            state = rtcfr_plus_iteration(game, state)
            if collector.due(t):
                collector.add(t, exploitability_efg(game, state.current), sccp_index=index)
    logger.info(
        f"RT ({state.local.value}, {state.regularizer.value}) on {game.name}: {config.total_iterations} iterations, "
        f"exploitability={exploitability_efg(game, state.current):.3e}"
    )
    return state.current, collector.records


def rtcfr_plus_run(game, config, rt_reach=RtReach.FULL, initial_profile=None, initial_reference=None):
    """N x T RTCFR+ iterations with warm starts; returns the last iterate and its records."""
    options = {"rt_reach": RtReach(rt_reach)}
    return _rt_tree_run(game, config, options, initial_profile, initial_reference)


def rt_mwu_efg_run(
    game,
    config,
    regularizer=Regularizer.KL,
    learning_rate=0.1,
    optimistic=False,
    rt_reach=RtReach.FULL,
    initial_profile=None,
    initial_reference=None,
):
    """RT with per-infoset MWU learners; KL gives R-NaD on trees, optimistic KL OR-NaD."""
    options = {
        "rt_reach": RtReach(rt_reach),
        "local": LocalLearner.MWU,
        "regularizer": Regularizer(regularizer),
        "learning_rate": learning_rate,
        "optimistic": optimistic,
    }
    return _rt_tree_run(game, config, options, initial_profile, initial_reference)
