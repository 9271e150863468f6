"""Goofspiel with n cards.

Both players hold bid cards 1..n. Prizes n, n-1, ..., 1 are revealed in that
fixed order. Each round player 0 bids, then player 1 bids without seeing it;
both bids are revealed afterwards. The higher bid takes the prize, ties
discard it. Player 1's payoff is its point total minus player 0's.
"""

from src.errors import DomainError
from src.games.efg import TreeGame, decision, terminal

MIN_CARDS = 3
MAX_CARDS = 5


def _history_key(bids):
    return ",".join(f"{b0}-{b1}" for b0, b1 in bids)


def _round(n, hands, bids, score):
    k = len(bids)
    if k == n:
        return terminal(score)
    prize = n - k
    key = _history_key(bids)

    def respond(b0):
        branches = []
        for b1 in sorted(hands[1]):
            delta = prize if b1 > b0 else (-prize if b0 > b1 else 0)
            rest = (hands[0] - {b0}, hands[1] - {b1})
            branches.append((str(b1), _round(n, rest, bids + [(b0, b1)], score + delta)))
        return decision(1, key, branches)

    return decision(0, key, [(str(b0), respond(b0)) for b0 in sorted(hands[0])])


def goofspiel(n):
    if not MIN_CARDS <= n <= MAX_CARDS:
        raise DomainError(f"goofspiel needs {MIN_CARDS} to {MAX_CARDS} cards, got {n}")
    cards = frozenset(range(1, n + 1))
    return TreeGame.from_root(_round(n, (cards, cards), [], 0), name=f"goofspiel_{n}")
