"""Brute-force oracles used to cross-check the fast evaluation paths.

They walk payoffs and trees with plain loops and share no evaluation code
with the game modules.
"""

import itertools

from src.errors import ConfigError
from src.games.efg import CHANCE, TERMINAL

MATRIX_CAP = 10_000
PURE_STRATEGY_CAP = 2**16


def oracle_exploitability(game, profile):
    """Exploitability by enumerating every pure deviation of both players."""
    rows, cols = game.rows, game.cols
    if rows * cols > MATRIX_CAP:
        raise ConfigError(f"oracle is capped at {MATRIX_CAP} payoff entries", code="SIZE_CAP")
    a = game.payoff.tolist()
    p0, p1 = profile.p0.tolist(), profile.p1.tolist()
    gain_1 = max(sum(p0[i] * a[i][j] for i in range(rows)) for j in range(cols))
    gain_0 = max(sum(-p1[j] * a[i][j] for j in range(cols)) for i in range(rows))
    return max(0.5 * (gain_1 + gain_0), 0.0)


def _action_prob(game, node, child, strategies):
    owner = int(game.player[node])
    if owner == CHANCE:
        return float(game.chance_prob[child])
    infoset = int(game.infoset[node])
    offset = int(game.offsets[owner][infoset])
    return float(strategies[owner][offset + int(game.action[child])])


def oracle_tree_value(game, strategies, player=1):
    """Expected utility of `player` by recursive walk; `strategies` are two flat sequence lists."""
    sign = 1.0 if player == 1 else -1.0

    def walk(node):
        if game.player[node] == TERMINAL:
            return sign * float(game.payoff[node])
        start, count = int(game.children_start[node]), int(game.children_count[node])
        total = 0.0
        for child in range(start, start + count):
            p = _action_prob(game, node, child, strategies)
            if p > 0.0:
                total += p * walk(child)
        return total

    return walk(0)


def pure_strategies(game, player):
    """Every pure behavioral strategy of `player` as a flat sequence list."""
    sizes = [int(k) for k in game.num_actions[player]]
    count = 1
    for k in sizes:
        count *= k
    if count > PURE_STRATEGY_CAP:
        raise ConfigError(f"{count} pure strategies exceed the cap of {PURE_STRATEGY_CAP}", code="SIZE_CAP")
    for choice in itertools.product(*[range(k) for k in sizes]):
        flat = []
        for k, a in zip(sizes, choice):
            flat.extend(1.0 if i == a else 0.0 for i in range(k))
        yield flat


def oracle_best_response_efg(game, opponent, player):
    """Best-response value of `player` against `opponent` (a BehaviorProfile) by enumeration."""
    other = opponent.side(1 - player).tolist()
    best = None
    for flat in pure_strategies(game, player):
        strategies = [flat, other] if player == 0 else [other, flat]
        value = oracle_tree_value(game, strategies, player)
        if best is None or value > best:
            best = value
    return best
