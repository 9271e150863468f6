"""Random matrix games with i.i.d. uniform payoffs on [-1, 1]."""

import numpy as np

from src.errors import DimensionMismatchError
from src.games.nfg import MatrixGame

# numpy PCG64 bit generator; fixed seeds reproduce across numpy releases
PRNG = "numpy.random.PCG64"


def random_nfg(rows, cols, seed):
    if rows < 1 or cols < 1:
        raise DimensionMismatchError(f"a matrix game needs positive dimensions, got {rows}x{cols}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return MatrixGame(rng.uniform(-1.0, 1.0, size=(rows, cols)))
