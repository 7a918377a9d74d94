"""Shared fixtures and independent oracles.

The oracles deliberately avoid the library's eigendecomposition code paths:
the matrix exponential is a scaling-and-squaring truncated Taylor series,
the resolvent oracle is a direct linear solve, invariant subsets are found
by exhaustive search over all subsets evaluating the energy-splitting
criterion directly, and Markovianity is probed by randomized contractions.
"""

import itertools

import numpy as np
import pytest

from ergodec import DirichletForm, validate_space


# ---------------------------------------------------------------- oracles


def series_expm(matrix, t):
    """e^{t M} by scaling-and-squaring of a truncated Taylor series."""
    matrix = np.asarray(matrix, dtype=float) * t
    norm = np.abs(matrix).sum(axis=1).max()
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-16)))) + 1)
    scaled = matrix / (2.0 ** squarings)
    out = np.eye(matrix.shape[0])
    term = np.eye(matrix.shape[0])
    for k in range(1, 30):
        term = term @ scaled / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def solve_resolvent(form, alpha):
    """(alpha - L)^{-1} by direct solve, independent of the spectral path."""
    n = form.n
    return np.linalg.solve(alpha * np.eye(n) - form.generator, np.eye(n))


def energy_split_defect(matrix, mask):
    """Defect of E(f,g) = E(1_A f, 1_A g) + E(1_{A^c} f, 1_{A^c} g) on the basis."""
    d = np.diag(mask.astype(float))
    dc = np.eye(len(mask)) - d
    return np.abs(matrix - d @ matrix @ d - dc @ matrix @ dc).max()


def brute_force_invariant_partition(form, tol=1e-10):
    """Minimal invariant partition from exhaustive subset search.

    Enumerates all subsets, keeps those with vanishing energy-splitting
    defect, and intersects the invariant sets containing each point to get
    the atoms of the invariant algebra.
    """
    n = form.n
    scale = 1.0 + np.abs(form.matrix).max()
    invariant_masks = []
    for bits in itertools.product((False, True), repeat=n):
        mask = np.array(bits)
        if energy_split_defect(form.matrix, mask) <= tol * scale:
            invariant_masks.append(mask)
    blocks = []
    seen = np.zeros(n, dtype=bool)
    for x in range(n):
        if seen[x]:
            continue
        atom = np.ones(n, dtype=bool)
        for mask in invariant_masks:
            if mask[x]:
                atom &= mask
        seen |= atom
        blocks.append(tuple(form.space.points[i] for i in np.flatnonzero(atom)))
    return tuple(blocks)


def random_contraction_search(matrix, rng, trials=200):
    """Largest energy increase found under random unit contractions."""
    n = matrix.shape[0]
    worst = 0.0
    for _ in range(trials):
        f = rng.uniform(-2.0, 2.0, size=n)
        g = np.clip(f, 0.0, 1.0)
        worst = max(worst, float(g @ matrix @ g - f @ matrix @ f))
    return worst


# ---------------------------------------------------------------- fixtures


@pytest.fixture
def fx_edge():
    """Two points of mass one joined by a unit edge."""
    space = validate_space([("a", 1.0), ("b", 1.0)])
    return DirichletForm.from_jump_kernel(space, np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def fx_twin():
    """Two disjoint edges on a uniform probability space."""
    space = validate_space([("a", 0.25), ("b", 0.25), ("c", 0.25), ("d", 0.25)])
    jump = np.zeros((4, 4))
    jump[0, 1] = jump[1, 0] = 1.0
    jump[2, 3] = jump[3, 2] = 2.0
    return DirichletForm.from_jump_kernel(space, jump)


@pytest.fixture
def fx_kill():
    """A unit edge with killing weight one at the first point."""
    space = validate_space([("a", 1.0), ("b", 1.0)])
    jump = np.array([[0.0, 1.0], [1.0, 0.0]])
    return DirichletForm.from_jump_kernel(space, jump, killing=[1.0, 0.0])


@pytest.fixture
def fx_grid():
    """3 x 2 grid with unit edges along the first coordinate only."""
    points = [(i, j) for j in (0, 1) for i in (0, 1, 2)]
    space = validate_space([(p, 1.0 / 6.0) for p in points])
    jump = np.zeros((6, 6))
    for j in (0, 1):
        for i in (0, 1):
            x = space.index_of((i, j))
            y = space.index_of((i + 1, j))
            jump[x, y] = jump[y, x] = 1.0
    return DirichletForm.from_jump_kernel(space, jump)


@pytest.fixture
def fx_twin_kill():
    """Disjoint union of the twin-edge fixture and the killed edge."""
    space = validate_space(
        [("a", 0.25), ("b", 0.25), ("c", 0.25), ("d", 0.25), ("e", 1.0), ("f", 1.0)]
    )
    jump = np.zeros((6, 6))
    jump[0, 1] = jump[1, 0] = 1.0
    jump[2, 3] = jump[3, 2] = 2.0
    jump[4, 5] = jump[5, 4] = 1.0
    killing = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    return DirichletForm.from_jump_kernel(space, jump, killing)
