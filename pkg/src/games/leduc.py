"""Leduc poker.

Six cards (ranks J, Q, K in two suits; card id = 2 * rank + suit), ante 1,
two betting rounds with bet sizes 2 and 4, at most two raises per round and
one public board card dealt between the rounds. Player 0 opens both rounds.
A pair with the board wins, otherwise the higher rank; equal ranks split.
Infosets see card ids, so suits are distinguishable.
"""

from src.games.efg import TreeGame, chance, decision, terminal

RANKS = "JQK"
NUM_CARDS = 6
ANTE = 1
BET_SIZES = (2, 4)
MAX_RAISES = 2


def _rank(card):
    return card // 2


def _card_name(card):
    return f"{RANKS[_rank(card)]}{'sh'[card % 2]}"


def _showdown_winner(private, board):
    r0, r1, rb = _rank(private[0]), _rank(private[1]), _rank(board)
    if r0 == rb:
        return 0
    if r1 == rb:
        return 1
    if r0 == r1:
        return None
    return 0 if r0 > r1 else 1


def _fold_payoff(folder, contributions):
    return -contributions[1] if folder == 1 else contributions[0]


def _round(private, board, rounds, actions, contributions, raises):
    """Betting subtree; `rounds` holds the finished rounds, `actions` the current one."""
    player = len(actions) % 2
    facing = contributions[0] != contributions[1]
    size = BET_SIZES[len(rounds)]
    branches = []
    if facing:
        branches.append(("f", terminal(_fold_payoff(player, contributions))))
    call = list(contributions)
    call[player] = max(contributions)
    closes = facing or actions == "c"
    if closes:
        branches.append(("c", _after_round(private, board, rounds + [actions + "c"], call)))
    else:
        branches.append(("c", _round(private, board, rounds, actions + "c", call, raises)))
    if raises < MAX_RAISES:
        raised = list(call)
        raised[player] += size
        branches.append(("r", _round(private, board, rounds, actions + "r", raised, raises + 1)))
    board_name = "" if board is None else _card_name(board)
    key = f"{_card_name(private[player])}{board_name}:{'/'.join(rounds + [actions])}"
    return decision(player, key, branches)


def _after_round(private, board, rounds, contributions):
    if len(rounds) == 1:
        used = set(private)
        boards = [c for c in range(NUM_CARDS) if c not in used]
        return chance(
            [(_card_name(b), 1.0 / len(boards), _round(private, b, rounds, "", contributions, 0)) for b in boards]
        )
    winner = _showdown_winner(private, board)
    if winner is None:
        return terminal(0.0)
    return terminal(contributions[0] if winner == 1 else -contributions[1])


def leduc_poker():
    deals = []
    for c0 in range(NUM_CARDS):
        second = [
            (_card_name(c1), 1.0 / (NUM_CARDS - 1), _round((c0, c1), None, [], "", [ANTE, ANTE], 0))
            for c1 in range(NUM_CARDS)
            if c1 != c0
        ]
        deals.append((_card_name(c0), 1.0 / NUM_CARDS, chance(second)))
    return TreeGame.from_root(chance(deals), name="leduc_poker")
