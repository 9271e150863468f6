import json

import numpy as np
import pytest
from helpers import random_behavior_profile

from src.errors import ConfigError, DimensionMismatchError, DomainError, GameValidationError
from src.games.efg import (
    TERMINAL,
    BehaviorProfile,
    GameNode,
    TreeGame,
    best_response_value,
    chance,
    decision,
    embed_matrix_game,
    expected_value,
    exploitability_efg,
    matrix_from_embedding,
    reach_probabilities,
    realization_plan,
    terminal,
)
from src.games.nfg import MatrixGame, Profile, expected_payoff, exploitability, loss_gradient
from src.games.random_nfg import random_nfg
from src.harness.oracle import oracle_best_response_efg, oracle_tree_value
from src.models.cfr import counterfactual_values


def _validation_code(root):
    with pytest.raises(GameValidationError) as info:
        TreeGame.from_root(root)
    return info.value.code


def test_non_simplex_chance():
    root = chance([("a", 0.5, terminal(1)), ("b", 0.4, terminal(0))])
    assert _validation_code(root) == "NON_SIMPLEX_CHANCE"


def test_decision_without_actions():
    root = decision(0, "a", [("x", terminal(1)), ("y", decision(1, "b", []))])
    assert _validation_code(root) == "DANGLING_INFOSET"


def test_non_finite_payoff():
    root = decision(0, "a", [("x", terminal(float("nan"))), ("y", terminal(0))])
    assert _validation_code(root) == "INVALID_PAYOFF"


def test_forgotten_own_action():
    def again():
        return decision(0, "again", [("l", terminal(1)), ("r", terminal(-1))])

    root = decision(0, "a", [("x", again()), ("y", again())])
    assert _validation_code(root) == "IMPERFECT_RECALL"


def test_infoset_with_different_action_counts():
    wide = decision(1, "b", [("l", terminal(1)), ("m", terminal(0)), ("r", terminal(-1))])
    narrow = decision(1, "b", [("l", terminal(1)), ("r", terminal(-1))])
    assert _validation_code(decision(0, "a", [("x", wide), ("y", narrow)])) == "IMPERFECT_RECALL"


def test_shared_node_is_a_cycle():
    leaf = terminal(1)
    assert _validation_code(decision(0, "a", [("x", leaf), ("y", leaf)])) == "CYCLE"


def test_terminal_with_children_is_malformed():
    bad = GameNode(TERMINAL, actions=["a"], children=[terminal(0)])
    assert _validation_code(decision(0, "a", [("x", bad)])) == "MALFORMED_NODE"


def test_arena_layout(kuhn):
    assert kuhn.player[0] == -1
    for node in range(1, kuhn.num_nodes):
        assert kuhn.parent[node] < node
    assert np.all(np.diff(kuhn.depth) >= 0)
    assert kuhn.num_sequences == [12, 12]


def test_json_round_trip(kuhn):
    again = TreeGame.from_json(kuhn.to_json())
    assert again.num_nodes == kuhn.num_nodes
    assert again.labels == kuhn.labels
    assert again.infoset_keys == kuhn.infoset_keys
    np.testing.assert_array_equal(again.payoff, kuhn.payoff)
    np.testing.assert_array_equal(again.chance_prob, kuhn.chance_prob)


def test_cyclic_json_is_rejected():
    data = {
        "nodes": [
            {"id": 0, "type": "decision", "player": 0, "infoset": "0:a", "actions": ["x"], "children": [1]},
            {"id": 1, "type": "decision", "player": 1, "infoset": "1:b", "actions": ["y"], "children": [0]},
        ]
    }
    with pytest.raises(GameValidationError) as info:
        TreeGame.from_json(json.dumps(data))
    assert info.value.code == "CYCLE"


def test_unreachable_json_node_is_rejected():
    data = {
        "nodes": [
            {"id": 0, "type": "decision", "player": 0, "infoset": "0:a", "actions": ["x"], "children": [1]},
            {"id": 1, "type": "terminal", "payoff": 1.0},
            {"id": 2, "type": "terminal", "payoff": 0.0},
        ]
    }
    with pytest.raises(GameValidationError) as info:
        TreeGame.from_dict(data)
    assert info.value.code == "MALFORMED_NODE"


def test_behavior_profile_validation(kuhn):
    with pytest.raises(DimensionMismatchError):
        BehaviorProfile(kuhn, (np.full(3, 0.5), np.full(12, 0.5)))
    with pytest.raises(DomainError):
        BehaviorProfile(kuhn, (np.full(12, 0.4), np.full(12, 0.5)))


def test_profile_json_round_trip(leduc, rng):
    profile = random_behavior_profile(leduc, rng)
    again = BehaviorProfile.from_dict(leduc, json.loads(profile.to_json()))
    for p in (0, 1):
        np.testing.assert_allclose(again.side(p), profile.side(p), atol=1e-15)


def test_terminal_reach_sums_to_one(goofspiel3, rng):
    profile = random_behavior_profile(goofspiel3, rng)
    reach = reach_probabilities(goofspiel3, profile)
    z = goofspiel3.terminals
    assert np.sum(reach.player0[z] * reach.player1[z] * reach.chance[z]) == pytest.approx(1.0)


def test_realization_plan_is_consistent(kuhn, rng):
    profile = random_behavior_profile(kuhn, rng)
    for p in (0, 1):
        plan = realization_plan(kuhn, p, profile.side(p))
        sums = kuhn.segment_sums(p, plan[:-1])
        np.testing.assert_allclose(sums, plan[kuhn.parent_seq[p]])


def test_expected_value_matches_recursive_walk(leduc, rng):
    profile = random_behavior_profile(leduc, rng)
    strategies = [profile.side(0).tolist(), profile.side(1).tolist()]
    assert expected_value(leduc, profile) == pytest.approx(oracle_tree_value(leduc, strategies), abs=1e-12)


def _embedded_profile(tree, profile):
    return BehaviorProfile(tree, (profile.p0.probs, profile.p1.probs))


def test_embedding_preserves_payoff_and_exploitability(rng):
    game = random_nfg(4, 3, seed=11)
    tree = embed_matrix_game(game)
    for _ in range(10):
        profile = Profile.from_arrays(rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(3)))
        embedded = _embedded_profile(tree, profile)
        assert expected_value(tree, embedded) == pytest.approx(expected_payoff(game, profile), abs=1e-12)
        assert exploitability_efg(tree, embedded) == pytest.approx(exploitability(game, profile), abs=1e-12)


def test_embedded_counterfactual_values_are_negated_losses(rng):
    game = random_nfg(3, 5, seed=2)
    tree = embed_matrix_game(game)
    profile = Profile.from_arrays(rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(5)))
    embedded = _embedded_profile(tree, profile)
    for player in (0, 1):
        expected = -loss_gradient(game, player, profile.side(1 - player))
        np.testing.assert_allclose(counterfactual_values(tree, embedded, player), expected, atol=1e-12)


def test_matrix_round_trips_through_embedding(biased_rps):
    np.testing.assert_array_equal(matrix_from_embedding(embed_matrix_game(biased_rps)).payoff, biased_rps.payoff)


def test_only_embeddings_convert_back(kuhn):
    with pytest.raises(ConfigError) as info:
        matrix_from_embedding(kuhn)
    assert info.value.code == "INCOMPATIBLE_GAME"


def test_relabeling_actions_keeps_exploitability(rng):
    game = random_nfg(4, 4, seed=5)
    rows, cols = rng.permutation(4), rng.permutation(4)
    permuted = MatrixGame(game.payoff[np.ix_(rows, cols)])
    profile = Profile.from_arrays(rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4)))
    moved = Profile.from_arrays(profile.p0.probs[rows], profile.p1.probs[cols])
    original = exploitability_efg(embed_matrix_game(game), _embedded_profile(embed_matrix_game(game), profile))
    relabeled = exploitability_efg(embed_matrix_game(permuted), _embedded_profile(embed_matrix_game(permuted), moved))
    assert relabeled == pytest.approx(original, abs=1e-12)


def test_best_response_beats_every_profile(liars_dice2, rng):
    for _ in range(5):
        profile = random_behavior_profile(liars_dice2, rng)
        value = expected_value(liars_dice2, profile)
        assert best_response_value(liars_dice2, profile, 1)[0] >= value - 1e-12
        assert best_response_value(liars_dice2, profile, 0)[0] >= -value - 1e-12
        assert exploitability_efg(liars_dice2, profile) >= 0.0


def test_best_response_profile_attains_its_value(kuhn, rng):
    profile = random_behavior_profile(kuhn, rng)
    for player in (0, 1):
        value, response = best_response_value(kuhn, profile, player)
        sign = 1.0 if player == 1 else -1.0
        assert sign * expected_value(kuhn, response) == pytest.approx(value, abs=1e-12)
        assert set(np.unique(response.side(player))) <= {0.0, 1.0}


def test_kuhn_best_response_matches_enumeration(kuhn, rng):
    for _ in range(3):
        profile = random_behavior_profile(kuhn, rng)
        for player in (0, 1):
            fast, _ = best_response_value(kuhn, profile, player)
            assert fast == pytest.approx(oracle_best_response_efg(kuhn, profile, player), abs=1e-12)


def test_uniform_kuhn_exploitability_matches_enumeration(kuhn):
    uniform = BehaviorProfile.uniform(kuhn)
    brute = 0.5 * sum(oracle_best_response_efg(kuhn, uniform, p) for p in (0, 1))
    assert exploitability_efg(kuhn, uniform) == pytest.approx(brute, abs=1e-12)
    assert exploitability_efg(kuhn, uniform) > 0.1
