"""Two-player zero-sum extensive-form games with perfect recall.

Games are built from a tree of `GameNode` objects and frozen into a flat
arena: nodes are numbered breadth-first, so the children of a node are
contiguous, parents have smaller ids than their children and every depth is
a contiguous id range. Traversals run level by level over numpy arrays.

Behavioral strategies are stored per player as one flat array over that
player's sequences (infoset, action); infoset I owns the slice
offsets[I] : offsets[I] + num_actions[I]. Index `num_sequences` stands for
the empty sequence wherever a "last own sequence" is needed.
"""

import json
import logging
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import ConfigError, DimensionMismatchError, DomainError, GameValidationError
from src.games.nfg import SIMPLEX_TOL, UNDERFLOW, MatrixGame, SimplexVector, check_player

logger = logging.getLogger(__name__)

CHANCE = -1
TERMINAL = -2
CHANCE_TOL = 1e-9

# Infosets of one player grouped by how many own actions precede them
OwnLevel = namedtuple("OwnLevel", ["infosets", "seqs", "starts"])
ReachProbabilities = namedtuple("ReachProbabilities", ["player0", "player1", "chance"])


# ======================================================================
# Builder
# ======================================================================


@dataclass(eq=False)
class GameNode:
    """Mutable tree node used to assemble games before freezing them."""

    player: int
    infoset: Optional[str] = None
    actions: list = field(default_factory=list)
    children: list = field(default_factory=list)
    chance_probs: Optional[list] = None
    payoff: float = 0.0


def terminal(payoff):
    return GameNode(TERMINAL, payoff=float(payoff))


def decision(player, infoset, branches):
    """Decision node; `branches` is a list of (action label, child)."""
    return GameNode(player, infoset=infoset, actions=[a for a, _ in branches], children=[c for _, c in branches])


def chance(outcomes):
    """Chance node; `outcomes` is a list of (label, probability, child)."""
    return GameNode(
        CHANCE,
        actions=[label for label, _, _ in outcomes],
        chance_probs=[float(p) for _, p, _ in outcomes],
        children=[c for _, _, c in outcomes],
    )


# ======================================================================
# Arena
# ======================================================================


def _readonly(values, dtype):
    arr = np.asarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


class TreeGame:
    """Immutable arena of histories; see the module docstring for the layout."""

    def __init__(
        self, name, player, parent, action, labels, children_start, children_count, chance_prob, payoff, infoset, infoset_keys
    ):
        self.name = name
        self.player = _readonly(player, np.int64)
        self.parent = _readonly(parent, np.int64)
        self.action = _readonly(action, np.int64)
        self.labels = list(labels)
        self.children_start = _readonly(children_start, np.int64)
        self.children_count = _readonly(children_count, np.int64)
        self.chance_prob = _readonly(chance_prob, float)
        self.payoff = _readonly(payoff, float)
        self.infoset = _readonly(infoset, np.int64)
        self.infoset_keys = (list(infoset_keys[0]), list(infoset_keys[1]))
        self._derive()

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def from_root(cls, root, name="game", validate=True):
        """Freeze a GameNode tree breadth-first. Shared or cyclic nodes raise CYCLE."""
        order = [root]
        seen = {id(root)}
        head = 0
        while head < len(order):
            node = order[head]
            head += 1
            if node.player == TERMINAL and node.children:
                raise GameValidationError("MALFORMED_NODE", "terminal node has children", node=head - 1)
            if len(node.actions) != len(node.children):
                raise GameValidationError("MALFORMED_NODE", "action labels and children differ in length", node=head - 1)
            for child in node.children:
                if id(child) in seen:
                    raise GameValidationError("CYCLE", "node reachable along two paths", node=head - 1)
                seen.add(id(child))
                order.append(child)

        index = {id(node): i for i, node in enumerate(order)}
        n = len(order)
        player = np.empty(n, dtype=np.int64)
        parent = np.full(n, -1, dtype=np.int64)
        action = np.full(n, -1, dtype=np.int64)
        labels = [""] * n
        children_start = np.zeros(n, dtype=np.int64)
        children_count = np.zeros(n, dtype=np.int64)
        chance_prob = np.ones(n)
        payoff = np.zeros(n)
        infoset = np.full(n, -1, dtype=np.int64)
        keys = ([], [])
        key_index = ({}, {})

        for i, node in enumerate(order):
            if node.player not in (0, 1, CHANCE, TERMINAL):
                raise GameValidationError("MALFORMED_NODE", f"unknown player {node.player!r}", node=i)
            player[i] = node.player
            children_count[i] = len(node.children)
            if node.children:
                children_start[i] = index[id(node.children[0])]
            for a, child in enumerate(node.children):
                c = index[id(child)]
                parent[c] = i
                action[c] = a
                labels[c] = str(node.actions[a])
            if node.player == TERMINAL:
                payoff[i] = node.payoff
            elif node.player == CHANCE:
                probs = node.chance_probs or []
                if len(probs) != len(node.children):
                    raise GameValidationError("NON_SIMPLEX_CHANCE", "chance node needs one probability per child", node=i)
                for child, p in zip(node.children, probs):
                    chance_prob[index[id(child)]] = p
            elif node.infoset is not None:
                table = key_index[node.player]
                if node.infoset not in table:
                    table[node.infoset] = len(keys[node.player])
                    keys[node.player].append(node.infoset)
                infoset[i] = table[node.infoset]

        game = cls(name, player, parent, action, labels, children_start, children_count, chance_prob, payoff, infoset, keys)
        if validate:
            validate_game(game)
        return game

    def _derive(self):
        n = self.player.size
        depth = np.zeros(n, dtype=np.int64)
        for i in range(1, n):
            depth[i] = depth[self.parent[i]] + 1
        self.depth = _readonly(depth, np.int64)
        bounds = np.flatnonzero(np.diff(depth)) + 1
        edges = [0, *bounds.tolist(), n]
        self.levels = [(edges[k], edges[k + 1]) for k in range(len(edges) - 1)]
        self.terminals = _readonly(np.flatnonzero(self.player == TERMINAL), np.int64)

        self.members = ([], [])
        self.num_actions = []
        self.offsets = []
        self.num_sequences = []
        for p in (0, 1):
            count = len(self.infoset_keys[p])
            nodes = np.flatnonzero((self.player == p) & (self.infoset >= 0))
            owners = self.infoset[nodes]
            members = [nodes[owners == k] for k in range(count)]
            actions = np.array([self.children_count[m[0]] if m.size else 0 for m in members], dtype=np.int64)
            offsets = np.concatenate([[0], np.cumsum(actions)[:-1]]).astype(np.int64) if count else np.zeros(0, np.int64)
            self.members[p].extend(members)
            self.num_actions.append(_readonly(actions, np.int64))
            self.offsets.append(_readonly(offsets, np.int64))
            self.num_sequences.append(int(actions.sum()))

        edge_owner = np.full(n, CHANCE, dtype=np.int64)
        edge_seq = np.full(n, -1, dtype=np.int64)
        for c in range(1, n):
            par = self.parent[c]
            owner = self.player[par]
            if owner in (0, 1) and self.infoset[par] >= 0:
                edge_owner[c] = owner
                I = self.infoset[par]
                if self.action[c] < self.num_actions[owner][I]:
                    edge_seq[c] = self.offsets[owner][I] + self.action[c]
        self.edge_owner = _readonly(edge_owner, np.int64)
        self.edge_seq = _readonly(edge_seq, np.int64)
        self.own_edges = tuple(_readonly(np.flatnonzero((edge_owner == p) & (edge_seq >= 0)), np.int64) for p in (0, 1))
        self.chance_edges = _readonly(np.flatnonzero(edge_owner == CHANCE)[1:] if n else [], np.int64)

        # last own sequence on the path to each node (num_sequences = empty)
        self.last_seq = []
        for p in (0, 1):
            last = np.full(n, self.num_sequences[p], dtype=np.int64)
            for start, end in self.levels[1:]:
                kids = np.arange(start, end)
                mine = (edge_owner[kids] == p) & (edge_seq[kids] >= 0)
                last[kids] = np.where(mine, edge_seq[kids], last[self.parent[kids]])
            self.last_seq.append(_readonly(last, np.int64))

        self.parent_seq = []
        self.own_depth = []
        self.own_levels = []
        for p in (0, 1):
            count = len(self.infoset_keys[p])
            seq_infoset = np.repeat(np.arange(count), self.num_actions[p])
            parent_seq = np.array(
                [self.last_seq[p][m[0]] if m.size else self.num_sequences[p] for m in self.members[p]], dtype=np.int64
            )
            own_depth = np.zeros(count, dtype=np.int64)
            for I in range(count):
                s = parent_seq[I]
                if s < self.num_sequences[p]:
                    own_depth[I] = own_depth[seq_infoset[s]] + 1
            self.parent_seq.append(_readonly(parent_seq, np.int64))
            self.own_depth.append(_readonly(own_depth, np.int64))
            levels = []
            for d in range(int(own_depth.max()) + 1 if count else 0):
                infosets = np.flatnonzero(own_depth == d)
                sizes = self.num_actions[p][infosets]
                seqs = np.concatenate([np.arange(o, o + k) for o, k in zip(self.offsets[p][infosets], sizes)])
                starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
                levels.append(OwnLevel(infosets, seqs, starts))
            self.own_levels.append(levels)
        self.seq_infoset = tuple(np.repeat(np.arange(len(self.infoset_keys[p])), self.num_actions[p]) for p in (0, 1))

    # ------------------------------------------------------------------
    # counts
    # ------------------------------------------------------------------

    @property
    def num_nodes(self):
        return int(self.player.size)

    @property
    def num_terminals(self):
        return int(self.terminals.size)

    def num_infosets(self, player):
        check_player(player)
        return len(self.infoset_keys[player])

    def children(self, node):
        start = self.children_start[node]
        return np.arange(start, start + self.children_count[node])

    def utility(self, player):
        """Terminal utilities of `player` over all nodes (zero off terminals)."""
        check_player(player)
        return self.payoff if player == 1 else -self.payoff

    def segment_sums(self, player, values):
        """Per-infoset sums of a flat per-sequence array."""
        if not self.num_infosets(player):
            return np.zeros(0)
        return np.add.reduceat(values, self.offsets[player])

    # ------------------------------------------------------------------
    # JSON
    # ------------------------------------------------------------------

    def to_dict(self):
        nodes = []
        for i in range(self.num_nodes):
            kids = [int(c) for c in self.children(i)]
            entry = {"id": i}
            p = int(self.player[i])
            if p == TERMINAL:
                entry.update(type="terminal", payoff=float(self.payoff[i]))
            elif p == CHANCE:
                entry.update(
                    type="chance",
                    actions=[self.labels[c] for c in kids],
                    probs=[float(self.chance_prob[c]) for c in kids],
                    children=kids,
                )
            else:
                I = int(self.infoset[i])
                entry.update(
                    type="decision",
                    player=p,
                    infoset=None if I < 0 else f"{p}:{self.infoset_keys[p][I]}",
                    actions=[self.labels[c] for c in kids],
                    children=kids,
                )
            nodes.append(entry)
        return {"name": self.name, "nodes": nodes}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data, validate=True):
        entries = data["nodes"]
        if not entries:
            raise GameValidationError("MALFORMED_NODE", "a game needs at least a root node")
        built = []
        for i, entry in enumerate(entries):
            kind = entry.get("type")
            if kind == "terminal":
                built.append(terminal(entry["payoff"]))
            elif kind == "chance":
                built.append(GameNode(CHANCE, actions=list(entry["actions"]), chance_probs=list(entry["probs"])))
            elif kind == "decision":
                key = entry.get("infoset")
                if key is not None:
                    prefix, _, key = key.partition(":")
                    if prefix != str(entry["player"]):
                        raise GameValidationError("MALFORMED_NODE", f"infoset {entry['infoset']!r} names another player", node=i)
                built.append(GameNode(int(entry["player"]), infoset=key, actions=list(entry["actions"])))
            else:
                raise GameValidationError("MALFORMED_NODE", f"unknown node type {kind!r}", node=i)
        for i, entry in enumerate(entries):
            for c in entry.get("children", []):
                if not 0 <= c < len(built):
                    raise GameValidationError("MALFORMED_NODE", f"child id {c} out of range", node=i)
                built[i].children.append(built[c])
        game = cls.from_root(built[0], name=data.get("name", "game"), validate=validate)
        if game.num_nodes != len(built):
            raise GameValidationError("MALFORMED_NODE", "nodes unreachable from the root")
        return game

    @classmethod
    def from_json(cls, text, validate=True):
        return cls.from_dict(json.loads(text), validate=validate)


# ======================================================================
# Validation
# ======================================================================


def validate_game(game):
    """Raise GameValidationError on the first violated invariant, else return True."""
    for i in np.flatnonzero(game.player == CHANCE):
        kids = np.asarray(game.children(i))
        probs = game.chance_prob[kids] if kids.size else np.zeros(0)
        if kids.size == 0 or np.any(probs < 0) or abs(probs.sum() - 1.0) > CHANCE_TOL:
            raise GameValidationError("NON_SIMPLEX_CHANCE", "chance probabilities are not a distribution", node=int(i))

    for i in np.flatnonzero((game.player == 0) | (game.player == 1)):
        if game.infoset[i] < 0 or game.children_count[i] == 0:
            raise GameValidationError("DANGLING_INFOSET", "decision node without infoset or actions", node=int(i))

    for i in game.terminals:
        if not np.isfinite(game.payoff[i]):
            raise GameValidationError("INVALID_PAYOFF", "terminal payoff is not finite", node=int(i))

    for p in (0, 1):
        for I, members in enumerate(game.members[p]):
            if members.size == 0:
                raise GameValidationError("DANGLING_INFOSET", f"infoset {game.infoset_keys[p][I]!r} has no nodes")
            counts = game.children_count[members]
            if np.any(counts != counts[0]):
                bad = int(members[np.argmax(counts != counts[0])])
                raise GameValidationError("IMPERFECT_RECALL", "infoset members differ in action count", node=bad)
            seqs = game.last_seq[p][members]
            if np.any(seqs != seqs[0]):
                bad = int(members[np.argmax(seqs != seqs[0])])
                raise GameValidationError("IMPERFECT_RECALL", "infoset members differ in own action history", node=bad)

    logger.debug(f"{game.name}: {game.num_nodes} nodes, {game.num_terminals} terminals validated")
    return True


# ======================================================================
# Behavioral profiles
# ======================================================================


def _normalize_segments(game, player, values):
    s = np.array(values, dtype=float)
    if s.ndim != 1 or s.size != game.num_sequences[player]:
        raise DimensionMismatchError(
            f"player {player} strategy has {s.size} entries, game has {game.num_sequences[player]} sequences"
        )
    if not np.all(np.isfinite(s)):
        raise DomainError("behavioral strategy contains NaN or Inf")
    if np.any(s < -SIMPLEX_TOL):
        raise DomainError(f"negative probability {s.min()!r}")
    s[s < UNDERFLOW] = 0.0
    if s.size:
        totals = game.segment_sums(player, s)
        if np.any(np.abs(totals - 1.0) > 1e-6):
            bad = int(np.argmax(np.abs(totals - 1.0) > 1e-6))
            raise DomainError(f"infoset {game.infoset_keys[player][bad]!r} probabilities sum to {totals[bad]!r}")
        s = s / totals[game.seq_infoset[player]]
    s.setflags(write=False)
    return s


def normalize_weights(game, player, weights):
    """Per-infoset normalization of nonnegative weights; zero segments become uniform."""
    w = np.asarray(weights, dtype=float)
    totals = game.segment_sums(player, w)
    uniform = 1.0 / game.num_actions[player][game.seq_infoset[player]]
    per_seq = totals[game.seq_infoset[player]]
    return np.where(per_seq > 0, w / np.where(per_seq > 0, per_seq, 1.0), uniform)


@dataclass(frozen=True, eq=False)
class BehaviorProfile:
    """One distribution per infoset for both players, as flat sequence arrays."""

    game: TreeGame
    strategies: tuple

    def __post_init__(self):
        if len(self.strategies) != 2:
            raise DimensionMismatchError("a profile holds exactly two strategies")
        fixed = tuple(_normalize_segments(self.game, p, s) for p, s in enumerate(self.strategies))
        object.__setattr__(self, "strategies", fixed)

    @classmethod
    def uniform(cls, game):
        return cls(game, tuple(1.0 / game.num_actions[p][game.seq_infoset[p]] for p in (0, 1)))

    @classmethod
    def from_weights(cls, game, w0, w1):
        return cls(game, (normalize_weights(game, 0, w0), normalize_weights(game, 1, w1)))

    def side(self, player):
        check_player(player)
        return self.strategies[player]

    def replace(self, player, strategy):
        check_player(player)
        pair = list(self.strategies)
        pair[player] = strategy
        return BehaviorProfile(self.game, tuple(pair))

    def infoset(self, player, index):
        o = self.game.offsets[player][index]
        return SimplexVector(self.strategies[player][o : o + self.game.num_actions[player][index]])

    def to_dict(self):
        out = {}
        for p in (0, 1):
            for I, key in enumerate(self.game.infoset_keys[p]):
                out[f"{p}:{key}"] = self.infoset(p, I).tolist()
        return out

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, game, data):
        strategies = []
        for p in (0, 1):
            s = np.zeros(game.num_sequences[p])
            for I, key in enumerate(game.infoset_keys[p]):
                o, k = game.offsets[p][I], game.num_actions[p][I]
                s[o : o + k] = data[f"{p}:{key}"]
            strategies.append(s)
        return cls(game, tuple(strategies))


def max_strategy_difference(a, b):
    return max(float(np.abs(a.side(p) - b.side(p)).max(initial=0.0)) for p in (0, 1))


# ======================================================================
# Traversals
# ======================================================================


def _check_profile(game, profile):
    if any(profile.strategies[p].size != game.num_sequences[p] for p in (0, 1)):
        raise DimensionMismatchError("profile does not match the game")


def edge_probabilities(game, profile):
    """Probability of the edge into every node (1 at the root)."""
    _check_profile(game, profile)
    probs = np.array(game.chance_prob, dtype=float)
    for p in (0, 1):
        kids = game.own_edges[p]
        probs[kids] = profile.side(p)[game.edge_seq[kids]]
    return probs


def reach_probabilities(game, profile):
    """Per-node reach contributions of player 0, player 1 and chance; all 1 at the root."""
    _check_profile(game, profile)
    n = game.num_nodes
    factors = [np.ones(n), np.ones(n), np.ones(n)]
    for p in (0, 1):
        kids = game.own_edges[p]
        factors[p][kids] = profile.side(p)[game.edge_seq[kids]]
    factors[2][game.chance_edges] = game.chance_prob[game.chance_edges]
    reach = [np.ones(n), np.ones(n), np.ones(n)]
    for start, end in game.levels[1:]:
        par = game.parent[start:end]
        for k in range(3):
            reach[k][start:end] = reach[k][par] * factors[k][start:end]
    return ReachProbabilities(*reach)


def node_values(game, edge_probs, player):
    """Expected utility of `player` below every node."""
    values = np.array(game.utility(player), dtype=float)
    for start, end in reversed(game.levels[1:]):
        np.add.at(values, game.parent[start:end], edge_probs[start:end] * values[start:end])
    return values


def expected_value(game, profile):
    """Player 1's expected payoff."""
    reach = reach_probabilities(game, profile)
    z = game.terminals
    return float(np.sum(reach.player0[z] * reach.player1[z] * reach.chance[z] * game.payoff[z]))


def opponent_reach(reach, player):
    check_player(player)
    return (reach.player1 if player == 0 else reach.player0) * reach.chance


def terminal_sequence_utilities(game, profile, player):
    """sum of pi_-i(z) * u_i(z) grouped by the last own sequence of z (empty sequence last)."""
    reach = reach_probabilities(game, profile)
    z = game.terminals
    weights = opponent_reach(reach, player)[z] * game.utility(player)[z]
    out = np.zeros(game.num_sequences[player] + 1)
    np.add.at(out, game.last_seq[player][z], weights)
    return out


def realization_plan(game, player, strategy):
    """Sequence-form realization weights x_i(s); the empty sequence (last entry) is 1."""
    x = np.zeros(game.num_sequences[player] + 1)
    x[-1] = 1.0
    for level in game.own_levels[player]:
        parents = game.parent_seq[player][level.infosets]
        x[level.seqs] = np.repeat(x[parents], game.num_actions[player][level.infosets]) * strategy[level.seqs]
    return x


def best_response_value(game, opponent_profile, player):
    """Best-response utility of `player` and a pure best-response profile.

    Infosets are solved from the deepest own level up; each picks the action
    with the largest opponent-reach-weighted value, lowest index on ties.
    The returned profile keeps the opponent's strategy.
    """
    check_player(player)
    values = terminal_sequence_utilities(game, opponent_profile, player)
    offsets = game.offsets[player]
    sizes = game.num_actions[player]
    choice = np.zeros(game.num_infosets(player), dtype=np.int64)
    for level in reversed(game.own_levels[player]):
        vals = values[level.seqs]
        best = np.maximum.reduceat(vals, level.starts)
        counts = sizes[level.infosets]
        local = level.seqs - np.repeat(offsets[level.infosets], counts)
        candidates = np.where(vals >= np.repeat(best, counts), local, np.iinfo(np.int64).max)
        choice[level.infosets] = np.minimum.reduceat(candidates, level.starts)
        np.add.at(values, game.parent_seq[player][level.infosets], best)

    pure = np.zeros(game.num_sequences[player])
    pure[offsets + choice] = 1.0
    return float(values[-1]), opponent_profile.replace(player, pure)


def exploitability_efg(game, profile):
    gain_0, _ = best_response_value(game, profile, 0)
    gain_1, _ = best_response_value(game, profile, 1)
    return max(0.5 * (gain_0 + gain_1), 0.0)


# ======================================================================
# Matrix-game embedding
# ======================================================================


def embed_matrix_game(game):
    """Depth-2 tree: player 0 moves at the root, player 1 moves without seeing it."""
    rows = []
    for a0 in range(game.rows):
        leaves = [(f"c{a1}", terminal(game.payoff[a0, a1])) for a1 in range(game.cols)]
        rows.append((f"r{a0}", decision(1, "root", leaves)))
    return TreeGame.from_root(decision(0, "root", rows), name=f"matrix_{game.rows}x{game.cols}")


def matrix_from_embedding(tree):
    """Inverse of embed_matrix_game; anything else is INCOMPATIBLE_GAME."""
    if (
        tree.player[0] != 0
        or tree.num_infosets(0) != 1
        or tree.num_infosets(1) != 1
        or np.any(tree.player[tree.children(0)] != 1)
        or tree.num_terminals != tree.num_nodes - 1 - tree.children_count[0]
    ):
        raise ConfigError(f"{tree.name} is not an embedded matrix game", code="INCOMPATIBLE_GAME")
    rows, cols = int(tree.num_actions[0][0]), int(tree.num_actions[1][0])
    payoff = np.zeros((rows, cols))
    for a0, node in enumerate(tree.children(0)):
        for a1, leaf in enumerate(tree.children(node)):
            if tree.player[leaf] != TERMINAL:
                raise ConfigError(f"{tree.name} is not an embedded matrix game", code="INCOMPATIBLE_GAME")
            payoff[a0, a1] = tree.payoff[leaf]
    return MatrixGame(payoff)
