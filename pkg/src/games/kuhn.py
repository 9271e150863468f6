"""Kuhn poker: three cards, one card each, ante 1, one betting round with bet size 1."""

from src.games.efg import TreeGame, chance, decision, terminal

CARDS = ("J", "Q", "K")
ANTE = 1
BET = 1


def _showdown(cards, stake):
    return stake if cards[1] > cards[0] else -stake


def _betting(cards, history):
    """Subtree after `history` of p(ass) and b(et) actions; payoffs are player 1's."""
    if history == "pp":
        return terminal(_showdown(cards, ANTE))
    if history in ("bb", "pbb"):
        return terminal(_showdown(cards, ANTE + BET))
    if history == "bp":
        return terminal(-ANTE)
    if history == "pbp":
        return terminal(ANTE)
    player = len(history) % 2
    key = f"{CARDS[cards[player]]}{history}"
    return decision(player, key, [(a, _betting(cards, history + a)) for a in "pb"])


def kuhn_poker():
    deals = []
    for c0 in range(3):
        second = [(CARDS[c1], 0.5, _betting((c0, c1), "")) for c1 in range(3) if c1 != c0]
        deals.append((CARDS[c0], 1.0 / 3.0, chance(second)))
    return TreeGame.from_root(chance(deals), name="kuhn_poker")
