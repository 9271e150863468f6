import numpy as np
import pytest

from src.games.goofspiel import goofspiel
from src.games.kuhn import kuhn_poker
from src.games.leduc import leduc_poker
from src.games.liars_dice import liars_dice
from src.games.nfg import MatrixGame


@pytest.fixture
def matching_pennies():
    return MatrixGame([[1.0, -1.0], [-1.0, 1.0]])


@pytest.fixture
def biased_rps():
    # unique interior equilibrium away from uniform
    return MatrixGame(np.array([[0.0, -1.0, 2.0], [1.0, 0.0, -1.0], [-2.0, 1.0, 0.0]]) / 2.0)


@pytest.fixture(scope="session")
def kuhn():
    return kuhn_poker()


@pytest.fixture(scope="session")
def leduc():
    return leduc_poker()


@pytest.fixture(scope="session")
def goofspiel3():
    return goofspiel(3)


@pytest.fixture(scope="session")
def liars_dice2():
    return liars_dice(2)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))

