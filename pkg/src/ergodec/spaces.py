"""Finite measure spaces, index spaces, disintegrations and quotient maps.

Measures on a finite point set are stored as weight vectors aligned with a
fixed point order.  Full support is enforced throughout: zero or negative
weights are rejected rather than dropped, so every validated space carries a
strictly positive measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptySpaceError,
    NonPositiveWeightError,
    NotAPartitionError,
)

Label = Hashable


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    """A finite ordered point set with strictly positive weights.

    Parameters
    ----------
    points : sequence of hashable labels
        Point labels; order fixes the coordinate convention for every vector
        and matrix over this space.
    mu : sequence of float
        Weight of each point, aligned with ``points``.  All weights must be
        strictly positive.
    """

    points: tuple
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "mu", _readonly(self.mu))
        if len(self.points) == 0:
            raise EmptySpaceError("a measure space needs at least one point")
        if self.mu.ndim != 1 or len(self.mu) != len(self.points):
            raise ValueError("weight vector must align with the point list")
        for i, w in enumerate(self.mu):
            if not w > 0:
                raise NonPositiveWeightError(i)
        if len(set(self.points)) != len(self.points):
            raise ValueError("point labels must be distinct")

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def total_mass(self) -> float:
        return float(self.mu.sum())

    @cached_property
    def _positions(self) -> dict:
        return {x: i for i, x in enumerate(self.points)}

    def index_of(self, label) -> int:
        return self._positions[label]

    def indices_of(self, labels) -> np.ndarray:
        return np.array([self._positions[x] for x in labels], dtype=int)

    def inner(self, f, g) -> float:
        """L2(mu) inner product of two vectors over the points."""
        return float(np.dot(np.asarray(f) * self.mu, np.asarray(g)))

    def norm(self, f) -> float:
        f = np.asarray(f)
        return float(np.sqrt(np.dot(f * f, self.mu)))

    def lp_norm(self, f, p) -> float:
        return float(np.dot(np.abs(np.asarray(f)) ** p, self.mu) ** (1.0 / p))

    def normalized(self) -> "FiniteMeasureSpace":
        """The same point set carrying the probability-rescaled measure."""
        return FiniteMeasureSpace(self.points, self.mu / self.total_mass)


def validate_space(raw: Iterable[tuple]) -> FiniteMeasureSpace:
    """Check a labelled weight list and return the measure space it defines.

    Parameters
    ----------
    raw : iterable of (label, weight) pairs

    Raises
    ------
    EmptySpaceError
        If the list is empty.
    NonPositiveWeightError
        If any weight is zero or negative; carries the offending position.
    """
    pairs = list(raw)
    if not pairs:
        raise EmptySpaceError("empty weight list")
    labels = [x for x, _ in pairs]
    weights = [w for _, w in pairs]
    return FiniteMeasureSpace(tuple(labels), weights)


@dataclass(frozen=True, eq=False)
class IndexSpace:
    """A finite index set with strictly positive weights (the base of a direct sum)."""

    labels: tuple
    nu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "nu", _readonly(self.nu))
        if len(self.labels) == 0:
            raise EmptySpaceError("an index space needs at least one label")
        if self.nu.ndim != 1 or len(self.nu) != len(self.labels):
            raise ValueError("index weights must align with the labels")
        for i, w in enumerate(self.nu):
            if not w > 0:
                raise NonPositiveWeightError(i)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("index labels must be distinct")

    @property
    def size(self) -> int:
        return len(self.labels)

    @cached_property
    def _positions(self) -> dict:
        return {z: i for i, z in enumerate(self.labels)}

    def position(self, label) -> int:
        return self._positions[label]

    def weight(self, label) -> float:
        return float(self.nu[self._positions[label]])


@dataclass(frozen=True, eq=False)
class Fiber:
    """A nonzero measure on a subset of points, given by support and weights."""

    support: tuple
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "weights", _readonly(self.weights))
        if len(self.support) == 0:
            raise EmptySpaceError("fiber support is empty")
        if len(self.weights) != len(self.support):
            raise ValueError("fiber weights must align with the support")
        for i, w in enumerate(self.weights):
            if not w > 0:
                raise NonPositiveWeightError(i)
        if len(set(self.support)) != len(self.support):
            raise ValueError("fiber support labels must be distinct")

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def as_space(self) -> FiniteMeasureSpace:
        return FiniteMeasureSpace(self.support, self.weights)


@dataclass(frozen=True, eq=False)
class MeasureFamily:
    """An indexed family of fiber measures over a common ambient point set.

    The family is the carrier of a pseudo-disintegration: it does not itself
    know the ambient measure, so the defining identity is checked by
    :func:`verify_pseudo_disintegration` against a given space.  Fibers may
    overlap; separation is a property, not a constructor requirement.
    """

    index: IndexSpace
    fibers: Mapping[Label, Fiber]

    def __post_init__(self):
        fibers = {z: f for z, f in self.fibers.items()}
        object.__setattr__(self, "fibers", fibers)
        if set(fibers) != set(self.index.labels):
            raise ValueError("fiber keys must coincide with the index labels")

    def fiber(self, label) -> Fiber:
        return self.fibers[label]

    def fiber_spaces(self) -> tuple:
        return tuple(self.fibers[z].as_space() for z in self.index.labels)


@dataclass(frozen=True, eq=False)
class QuotientMap:
    """A total map from points to fiber labels with the pushforward index measure."""

    space: FiniteMeasureSpace
    assignment: Mapping[Label, Label]
    index: IndexSpace

    def __post_init__(self):
        assignment = dict(self.assignment)
        object.__setattr__(self, "assignment", assignment)
        if set(assignment) != set(self.space.points):
            raise ValueError("assignment must cover exactly the points of the space")

    @cached_property
    def blocks(self) -> dict:
        """Mapping fiber label -> tuple of its points, in point order."""
        out = {z: [] for z in self.index.labels}
        for x in self.space.points:
            out[self.assignment[x]].append(x)
        return {z: tuple(v) for z, v in out.items()}

    def block_indices(self, label) -> np.ndarray:
        return self.space.indices_of(self.blocks[label])

    def __call__(self, point):
        return self.assignment[point]


def _canonical_blocks(space: FiniteMeasureSpace, partition: Sequence[Iterable[Label]]):
    """Sort each block by point position and blocks by smallest member position."""
    blocks = []
    for part in partition:
        labels = list(part)
        if not labels:
            raise NotAPartitionError("empty block in partition")
        try:
            idx = sorted(space.index_of(x) for x in labels)
        except KeyError as exc:
            raise NotAPartitionError(f"unknown point {exc.args[0]!r} in partition") from exc
        blocks.append(tuple(space.points[i] for i in idx))
    blocks.sort(key=lambda b: space.index_of(b[0]))
    covered = [x for b in blocks for x in b]
    if len(covered) != len(set(covered)) or set(covered) != set(space.points):
        raise NotAPartitionError("blocks must cover the space exactly once")
    return blocks


def quotient_by_invariant_partition(
    space: FiniteMeasureSpace, partition: Sequence[Iterable[Label]]
) -> QuotientMap:
    """Build the quotient map of a partition, with the pushforward measure.

    Fiber labels are deterministic: blocks are ordered by their smallest
    point position and labelled ``z0, z1, ...``, so repeated runs produce
    byte-identical reports.
    """
    blocks = _canonical_blocks(space, partition)
    labels = tuple(f"z{i}" for i in range(len(blocks)))
    nu = [float(space.mu[space.indices_of(b)].sum()) for b in blocks]
    assignment = {x: z for z, b in zip(labels, blocks) for x in b}
    return QuotientMap(space, assignment, IndexSpace(labels, nu))


def disintegrate_over_partition(
    space: FiniteMeasureSpace, partition: Sequence[Iterable[Label]]
) -> tuple[QuotientMap, MeasureFamily]:
    """Disintegrate a measure over the blocks of a partition.

    Each fiber receives the conditional probability measure
    ``mu restricted to the block, divided by the block mass``; the index
    weight of a fiber is the block mass.  The resulting family is separated,
    strongly consistent with the quotient map, and satisfies the
    pseudo-disintegration identity exactly in exact arithmetic.

    Raises
    ------
    NotAPartitionError
        If the blocks fail to cover the space exactly once.
    """
    qmap = quotient_by_invariant_partition(space, partition)
    fibers = {}
    for z in qmap.index.labels:
        block = qmap.blocks[z]
        idx = space.indices_of(block)
        mass = qmap.index.weight(z)
        fibers[z] = Fiber(block, space.mu[idx] / mass)
    return qmap, MeasureFamily(qmap.index, fibers)


def is_separated(family: MeasureFamily):
    """Decide whether fiber supports are pairwise disjoint.

    Returns ``(True, supports)`` with the supports as a separating family,
    or ``(False, witness)`` with a point lying in two supports.
    """
    seen = set()
    for z in family.index.labels:
        for x in family.fibers[z].support:
            if x in seen:
                return False, x
            seen.add(x)
    return True, tuple(family.fibers[z].support for z in family.index.labels)


@dataclass(frozen=True)
class DisintegrationReport:
    """Residuals of the pseudo-disintegration identity for a family."""

    max_point_defect: float
    max_integral_defect: float
    tolerance: float
    passed: bool


def verify_pseudo_disintegration(
    space: FiniteMeasureSpace,
    family: MeasureFamily,
    *,
    trials: int = 20,
    rng=None,
    tolerance: float = 1e-12,
) -> DisintegrationReport:
    """Measure how far a family is from disintegrating the ambient measure.

    Reports the worst singleton defect ``|mu({x}) - sum_z nu(z) mu_z({x})|``
    and, for ``trials`` random test functions g, the defect of the iterated
    integral against the plain integral of g.  Report-style: never raises on
    a failing family.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    mixed = np.zeros(space.n)
    for z in family.index.labels:
        fib = family.fibers[z]
        mixed[space.indices_of(fib.support)] += family.index.weight(z) * fib.weights
    point_defect = float(np.abs(mixed - space.mu).max())

    integral_defect = 0.0
    for _ in range(trials):
        g = rng.uniform(-1.0, 1.0, size=space.n)
        lhs = float(np.dot(g, space.mu))
        rhs = float(np.dot(g, mixed))
        integral_defect = max(integral_defect, abs(lhs - rhs))

    scale = max(1.0, float(space.mu.max()))
    passed = point_defect <= tolerance * scale and integral_defect <= tolerance * scale * space.n
    return DisintegrationReport(point_defect, integral_defect, tolerance, passed)
