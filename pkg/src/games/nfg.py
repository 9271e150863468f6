"""Two-player zero-sum normal-form games.

Only player 1's utility is stored; player 0's utility is its negation
everywhere. All value types are immutable once constructed.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np

from src.errors import DimensionMismatchError, DomainError, NumericalError

logger = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-12
UNDERFLOW = 1e-300
# Inputs further than this from a distribution are rejected instead of renormalized
NORMALIZATION_SLACK = 1e-6


def as_finite_vector(values, name="vector"):
    vec = np.asarray(values, dtype=float)
    if vec.ndim != 1:
        raise DimensionMismatchError(f"{name} must be one-dimensional, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise NumericalError(f"{name} contains NaN or Inf")
    return vec


@dataclass(frozen=True, eq=False)
class SimplexVector:
    """Probability distribution over a finite action set."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise DomainError("a simplex vector needs at least one entry")
        if not np.all(np.isfinite(p)):
            raise NumericalError("simplex vector contains NaN or Inf")
        if np.any(p < -SIMPLEX_TOL):
            raise DomainError(f"negative probability {p.min()!r}")
        p[p < UNDERFLOW] = 0.0
        total = p.sum()
        if total <= 0.0 or abs(total - 1.0) > NORMALIZATION_SLACK:
            raise DomainError(f"probabilities sum to {total!r}, not 1")
        if abs(total - 1.0) > SIMPLEX_TOL:
            p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, size):
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def pure(cls, size, action):
        p = np.zeros(size)
        p[action] = 1.0
        return cls(p)

    @classmethod
    def from_weights(cls, weights):
        """Normalize nonnegative weights; all-zero weights give the uniform distribution."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if total <= 0.0:
            return cls.uniform(w.size)
        return cls(w / total)

    @property
    def size(self):
        return self.probs.size

    def __len__(self):
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def tolist(self):
        return self.probs.tolist()


@dataclass(frozen=True, eq=False)
class Profile:
    p0: SimplexVector
    p1: SimplexVector

    @classmethod
    def uniform(cls, game):
        return cls(SimplexVector.uniform(game.rows), SimplexVector.uniform(game.cols))

    @classmethod
    def from_arrays(cls, p0, p1):
        return cls(SimplexVector(p0), SimplexVector(p1))

    def side(self, player):
        check_player(player)
        return self.p0 if player == 0 else self.p1

    def replace(self, player, strategy):
        check_player(player)
        return Profile(strategy, self.p1) if player == 0 else Profile(self.p0, strategy)

    def to_dict(self):
        return {"p0": self.p0.tolist(), "p1": self.p1.tolist()}


@dataclass(frozen=True, eq=False)
class MatrixGame:
    """Payoff matrix of player 1, indexed [a_0, a_1]."""

    payoff: np.ndarray

    def __post_init__(self):
        a = np.array(self.payoff, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionMismatchError(f"payoff must be a non-empty matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NumericalError("payoff matrix contains NaN or Inf")
        if np.abs(a).max() > 1.0:
            logger.warning(f"Payoffs outside [-1, 1] (max |u| = {np.abs(a).max():.6g}); bounds assume normalized payoffs")
        a.setflags(write=False)
        object.__setattr__(self, "payoff", a)

    @property
    def rows(self):
        return self.payoff.shape[0]

    @property
    def cols(self):
        return self.payoff.shape[1]

    def num_actions(self, player):
        check_player(player)
        return self.rows if player == 0 else self.cols

    def to_dict(self):
        return {"rows": self.rows, "cols": self.cols, "payoff": self.payoff.tolist()}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        game = cls(data["payoff"])
        if (game.rows, game.cols) != (data["rows"], data["cols"]):
            raise DimensionMismatchError(
                f"declared {data['rows']}x{data['cols']} but payoff is {game.rows}x{game.cols}"
            )
        return game

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def check_player(player):
    if player not in (0, 1):
        raise DomainError(f"player must be 0 or 1, got {player!r}")


def _check_profile(game, profile):
    if profile.p0.size != game.rows or profile.p1.size != game.cols:
        raise DimensionMismatchError(
            f"profile is {profile.p0.size}x{profile.p1.size}, game is {game.rows}x{game.cols}"
        )


def _check_opponent(game, player, opponent):
    expected = game.num_actions(1 - player)
    if opponent.size != expected:
        raise DimensionMismatchError(f"opponent strategy has {opponent.size} entries, expected {expected}")


def expected_payoff(game, profile):
    """Player 1's expected utility sigma_0^T A sigma_1."""
    _check_profile(game, profile)
    return float(profile.p0.probs @ game.payoff @ profile.p1.probs)


def loss_gradient(game, player, opponent):
    """g_i(a_i) = -sum_{a_-i} sigma_-i(a_-i) u_i(a_i, a_-i), with u_0 = -u_1."""
    check_player(player)
    _check_opponent(game, player, opponent)
    if player == 0:
        return game.payoff @ opponent.probs
    return -(opponent.probs @ game.payoff)


def best_response(game, player, opponent):
    """Best pure response value and action; ties go to the lowest index."""
    utilities = -loss_gradient(game, player, opponent)
    action = int(np.argmax(utilities))
    return float(utilities[action]), action


def exploitability(game, profile):
    """0.5 * (max_a1 u_1(sigma_0, a_1) + max_a0 u_0(a_0, sigma_1))."""
    _check_profile(game, profile)
    gain_1, _ = best_response(game, 1, profile.p0)
    gain_0, _ = best_response(game, 0, profile.p1)
    return max(0.5 * (gain_1 + gain_0), 0.0)


def nash_distance(profile, ne_set):
    """Smallest half squared L2 distance from the profile to any listed equilibrium."""
    if not ne_set:
        raise DomainError("ne_set must contain at least one profile")
    distances = []
    for ne in ne_set:
        if ne.p0.size != profile.p0.size or ne.p1.size != profile.p1.size:
            raise DimensionMismatchError("equilibrium and profile dimensions differ")
        d0 = profile.p0.probs - ne.p0.probs
        d1 = profile.p1.probs - ne.p1.probs
        distances.append(0.5 * (d0 @ d0 + d1 @ d1))
    return float(min(distances))
