import itertools
import logging

import numpy as np
import pytest

from src.errors import DimensionMismatchError, DomainError, NumericalError
from src.games.nfg import (
    MatrixGame,
    Profile,
    SimplexVector,
    best_response,
    exploitability,
    expected_payoff,
    loss_gradient,
    nash_distance,
)
from src.harness.oracle import oracle_exploitability


def test_simplex_vector_rejects_invalid_entries():
    with pytest.raises(DomainError):
        SimplexVector([0.5, 0.6])
    with pytest.raises(DomainError):
        SimplexVector([1.1, -0.1])
    with pytest.raises(DomainError):
        SimplexVector([])
    with pytest.raises(NumericalError):
        SimplexVector([np.nan, 1.0])


def test_simplex_vector_renormalizes_small_drift():
    v = SimplexVector([0.5 + 1e-9, 0.5])
    assert v.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert not v.probs.flags.writeable


def test_from_weights_falls_back_to_uniform():
    np.testing.assert_allclose(SimplexVector.from_weights([0.0, 0.0, 0.0]).probs, [1 / 3] * 3)
    np.testing.assert_allclose(SimplexVector.from_weights([1.0, 3.0]).probs, [0.25, 0.75])


def test_matching_pennies_uniform_is_unexploitable(matching_pennies):
    assert exploitability(matching_pennies, Profile.uniform(matching_pennies)) == 0.0


def test_pure_profile_exploitability(matching_pennies):
    profile = Profile.from_arrays([1.0, 0.0], [1.0, 0.0])
    assert exploitability(matching_pennies, profile) == pytest.approx(1.0)


def test_loss_gradient_signs(matching_pennies):
    opponent = SimplexVector([0.75, 0.25])
    np.testing.assert_allclose(loss_gradient(matching_pennies, 0, opponent), [0.5, -0.5])
    np.testing.assert_allclose(loss_gradient(matching_pennies, 1, opponent), [-0.5, 0.5])


def test_expected_payoff_and_best_response(matching_pennies):
    profile = Profile.from_arrays([0.75, 0.25], [1.0, 0.0])
    assert expected_payoff(matching_pennies, profile) == pytest.approx(0.5)
    value, action = best_response(matching_pennies, 1, profile.p0)
    assert (value, action) == (pytest.approx(0.5), 0)


def test_best_response_ties_take_lowest_index(matching_pennies):
    _, action = best_response(matching_pennies, 0, SimplexVector.uniform(2))
    assert action == 0


def test_one_by_one_game_has_zero_exploitability():
    game = MatrixGame([[0.3]])
    assert exploitability(game, Profile.uniform(game)) == 0.0


def test_dimension_mismatch_raises(matching_pennies):
    with pytest.raises(DimensionMismatchError):
        exploitability(matching_pennies, Profile.from_arrays([1.0], [0.5, 0.5]))
    with pytest.raises(DimensionMismatchError):
        loss_gradient(matching_pennies, 0, SimplexVector.uniform(3))


def test_nash_distance(matching_pennies):
    uniform = Profile.uniform(matching_pennies)
    assert nash_distance(uniform, [uniform]) == 0.0
    pure = Profile.from_arrays([1.0, 0.0], [0.5, 0.5])
    assert nash_distance(pure, [uniform]) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        nash_distance(uniform, [])


def test_large_payoffs_are_warned_about(caplog):
    with caplog.at_level(logging.WARNING):
        MatrixGame([[2.0, 0.0], [0.0, 1.0]])
    assert "outside [-1, 1]" in caplog.text


def test_matrix_game_json_round_trip(matching_pennies):
    restored = MatrixGame.from_json(matching_pennies.to_json())
    np.testing.assert_array_equal(restored.payoff, matching_pennies.payoff)
    with pytest.raises(DimensionMismatchError):
        MatrixGame.from_dict({"rows": 3, "cols": 2, "payoff": [[1, 0], [0, 1]]})


def test_expected_payoff_of_two_by_three_grid():
    game = MatrixGame([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    assert expected_payoff(game, Profile.uniform(game)) == pytest.approx(3.5, abs=1e-12)


def _random_profile(rng, rows, cols):
    return Profile.from_arrays(rng.dirichlet(np.ones(rows)), rng.dirichlet(np.ones(cols)))


@pytest.mark.parametrize("scale", [0.25, 3.0, 7.0])
def test_exploitability_scales_with_payoffs(rng, scale):
    for _ in range(200):
        payoff = rng.uniform(-1.0, 1.0, (3, 4))
        profile = _random_profile(rng, 3, 4)
        base = exploitability(MatrixGame(payoff), profile)
        scaled = exploitability(MatrixGame(scale * payoff), profile)
        assert scaled == pytest.approx(scale * base, rel=1e-12, abs=1e-15)


def test_loss_gradient_is_linear_in_the_opponent(rng):
    game = MatrixGame(rng.uniform(-1.0, 1.0, (4, 3)))
    for player, size in ((0, 3), (1, 4)):
        for weight in (0.0, 0.3, 0.9):
            a, b = rng.dirichlet(np.ones(size)), rng.dirichlet(np.ones(size))
            mixed = SimplexVector(weight * a + (1.0 - weight) * b)
            expected = weight * loss_gradient(game, player, SimplexVector(a)) + (1.0 - weight) * loss_gradient(
                game, player, SimplexVector(b)
            )
            np.testing.assert_allclose(loss_gradient(game, player, mixed), expected, atol=1e-14)


def test_losses_of_both_players_cancel(rng):
    for _ in range(200):
        game = MatrixGame(rng.uniform(-1.0, 1.0, (3, 5)))
        profile = _random_profile(rng, 3, 5)
        g0 = loss_gradient(game, 0, profile.p1) @ profile.p0.probs
        g1 = loss_gradient(game, 1, profile.p0) @ profile.p1.probs
        assert g0 + g1 == pytest.approx(0.0, abs=1e-14)


def _ternary_games(rows, cols):
    for entries in itertools.product((-1.0, 0.0, 1.0), repeat=rows * cols):
        yield MatrixGame(np.reshape(entries, (rows, cols)))


@pytest.mark.parametrize("rows, cols", [(1, 1), (1, 4), (4, 1), (2, 2), (2, 3), (3, 2)])
def test_exploitability_matches_enumeration_on_every_small_ternary_game(rows, cols):
    for game in _ternary_games(rows, cols):
        profile = Profile.uniform(game)
        assert exploitability(game, profile) == pytest.approx(oracle_exploitability(game, profile), abs=1e-12)


def test_exploitability_matches_enumeration_on_ternary_games_up_to_4x4(rng):
    for _ in range(2000):
        rows, cols = (int(n) for n in rng.integers(1, 5, size=2))
        game = MatrixGame(rng.choice([-1.0, 0.0, 1.0], size=(rows, cols)))
        for profile in (Profile.uniform(game), _random_profile(rng, rows, cols)):
            assert exploitability(game, profile) == pytest.approx(oracle_exploitability(game, profile), abs=1e-12)


def test_uniform_exploitability_of_antisymmetric_games():
    # with A = -A^T both best responses to uniform gain the best column mean
    for upper in itertools.product((-1.0, 0.0, 1.0), repeat=3):
        payoff = np.zeros((3, 3))
        payoff[np.triu_indices(3, k=1)] = upper
        payoff -= payoff.T
        game = MatrixGame(payoff)
        assert exploitability(game, Profile.uniform(game)) == pytest.approx(payoff.mean(axis=0).max(), abs=1e-12)
