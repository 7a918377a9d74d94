"""Reproducible random instances with a prescribed component structure."""

from __future__ import annotations

import numpy as np

from .errors import InvalidShapeError
from .forms import DirichletForm
from .spaces import FiniteMeasureSpace


def random_form(
    seed,
    n: int,
    components: int,
    killing_prob: float = 0.0,
    density: float = 0.5,
    *,
    probability: bool = False,
) -> DirichletForm:
    """Draw a random Markovian form with exactly ``components`` invariant blocks.

    Each block is built as a random spanning tree plus extra edges appearing
    with probability ``density``; edge weights are uniform in [0.1, 2] so
    that no coupling sits near the component threshold.  Points then get a
    random permutation, so block membership is scattered across the point
    order.  Killing weights appear independently per point with probability
    ``killing_prob``.  The same seed always produces the same instance.

    Parameters
    ----------
    seed : int or numpy Generator
    n : int
        Number of points.
    components : int
        Number of minimal invariant blocks; requires 1 <= components <= n.
    killing_prob : float
        Per-point probability of a positive killing weight.
    density : float
        Probability of each non-tree edge inside a block.
    probability : bool
        Normalize the total mass to one.

    Raises
    ------
    InvalidShapeError
        If the requested shape is not realizable.
    """
    rng = np.random.default_rng(seed) if isinstance(seed, (int, np.integer)) else seed
    if not 1 <= components <= n:
        raise InvalidShapeError(f"need 1 <= components <= n, got components={components}, n={n}")

    sizes = np.ones(components, dtype=int)
    sizes += rng.multinomial(n - components, np.full(components, 1.0 / components))

    jump = np.zeros((n, n))
    offset = 0
    for size in sizes:
        for i in range(1, size):
            j = int(rng.integers(0, i))
            w = rng.uniform(0.1, 2.0)
            jump[offset + i, offset + j] = jump[offset + j, offset + i] = w
        for i in range(size):
            for j in range(i + 1, size):
                if jump[offset + i, offset + j] == 0.0 and rng.uniform() < density:
                    w = rng.uniform(0.1, 2.0)
                    jump[offset + i, offset + j] = jump[offset + j, offset + i] = w
        offset += size

    killing = np.where(rng.uniform(size=n) < killing_prob, rng.uniform(0.1, 2.0, size=n), 0.0)
    mu = rng.uniform(0.1, 2.0, size=n)
    if probability:
        mu = mu / mu.sum()

    perm = rng.permutation(n)
    jump = jump[np.ix_(perm, perm)]
    killing = killing[perm]

    space = FiniteMeasureSpace(tuple(f"p{i}" for i in range(n)), mu)
    return DirichletForm.from_jump_kernel(space, jump, killing)
