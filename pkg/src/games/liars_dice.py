"""Liar's dice with one die per player.

Bids are (quantity, face) pairs ordered by quantity, then face; each bid must
beat the previous one. Instead of bidding a player may call "liar" once a bid
exists. The highest face is wild. The bid is true when at least `quantity`
dice show `face` or the wild face; a true bid wins 1 for the bidder,
otherwise the caller wins 1.
"""

from src.errors import DomainError
from src.games.efg import TreeGame, chance, decision, terminal

MIN_SIDES = 2
MAX_SIDES = 6
NUM_DICE = 2
LIAR = "liar"


def bid_label(index, sides):
    quantity, face = divmod(index, sides)
    return f"{quantity + 1}x{face + 1}"


def _bid_is_true(index, dice, sides):
    quantity, face = divmod(index, sides)
    wild = sides - 1
    count = sum(1 for d in dice if d == face or d == wild)
    return count >= quantity + 1


def _bidding(dice, sides, bids):
    player = len(bids) % 2
    key = f"{dice[player] + 1}|{','.join(str(b) for b in bids)}"
    first = bids[-1] + 1 if bids else 0
    branches = [(bid_label(b, sides), _bidding(dice, sides, bids + [b])) for b in range(first, NUM_DICE * sides)]
    if bids:
        caller = player
        bidder_wins = _bid_is_true(bids[-1], dice, sides)
        winner = 1 - caller if bidder_wins else caller
        branches.append((LIAR, terminal(1.0 if winner == 1 else -1.0)))
    return decision(player, key, branches)


def liars_dice(sides):
    if not MIN_SIDES <= sides <= MAX_SIDES:
        raise DomainError(f"liar's dice needs {MIN_SIDES} to {MAX_SIDES} sides, got {sides}")
    deals = []
    for d0 in range(sides):
        second = [(str(d1 + 1), 1.0 / sides, _bidding((d0, d1), sides, [])) for d1 in range(sides)]
        deals.append((str(d0 + 1), 1.0 / sides, chance(second)))
    return TreeGame.from_root(chance(deals), name=f"liars_dice_{sides}")
