"""Weighted direct sums of L2 and Lp spaces, decomposable operators, and
direct integrals of quadratic forms over a finite index space.

Vector fields are tuples of per-fiber vectors, ordered like the index
labels.  The ambient Hilbert space carries the norm

    ||u||^2 = sum_z nu(z) ||u_z||^2_{L2(mu_z)},

so in stacked coordinates it is the L2 space of the concatenated weights
nu(z) * mu_z.  A decomposable operator is a block family acting fiberwise;
its assembled matrix is block diagonal in the stacked coordinates, and its
operator norm is the maximum of the fiber norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._linalg import (
    chebyshev_coefficients,
    chebyshev_matrix,
    polynomial_matrix,
    resolvent_from_eig,
    semigroup_from_eig,
    symmetrized_eig,
    weighted_operator_norm,
)
from .errors import (
    FiberDimensionMismatchError,
    InvalidExponentError,
    NotDecomposableError,
    NotSeparatedError,
)
from .forms import DirichletForm, is_markovian
from .spaces import (
    FiniteMeasureSpace,
    IndexSpace,
    MeasureFamily,
    QuotientMap,
    disintegrate_over_partition,
    is_separated,
)

_DECOMPOSABLE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DirectIntegralSpace:
    """The weighted direct sum of the L2 spaces of a family of fibers."""

    index: IndexSpace
    fibers: tuple

    def __post_init__(self):
        object.__setattr__(self, "fibers", tuple(self.fibers))
        if len(self.fibers) != self.index.size:
            raise FiberDimensionMismatchError("one fiber space per index label required")

    @cached_property
    def dims(self) -> tuple:
        return tuple(f.n for f in self.fibers)

    @cached_property
    def offsets(self) -> tuple:
        out, acc = [], 0
        for d in self.dims:
            out.append(acc)
            acc += d
        return tuple(out)

    @property
    def dim(self) -> int:
        return sum(self.dims)

    @cached_property
    def stacked_weights(self) -> np.ndarray:
        """Pointwise weights of the stacked coordinates: nu(z) * mu_z."""
        return np.concatenate(
            [nu * f.mu for nu, f in zip(self.index.nu, self.fibers)]
        )

    def slice_of(self, position: int) -> slice:
        return slice(self.offsets[position], self.offsets[position] + self.dims[position])

    def stack(self, field) -> np.ndarray:
        return np.concatenate([np.asarray(u, dtype=float) for u in field])

    def unstack(self, vector) -> tuple:
        vector = np.asarray(vector, dtype=float)
        return tuple(vector[self.slice_of(i)] for i in range(self.index.size))

    def inner(self, u, v) -> float:
        return float(
            sum(
                nu * f.inner(a, b)
                for nu, f, a, b in zip(self.index.nu, self.fibers, u, v)
            )
        )

    def norm(self, u) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))


@dataclass(frozen=True, eq=False)
class L2Embedding:
    """The diagonal embedding of L2(mu) into the direct sum over a family.

    Calling the embedding restricts a global vector to every fiber support.
    The map is always an isometry when the family pseudo-disintegrates the
    ambient measure; it is unitary exactly when the family is separated, in
    which case :meth:`inverse` reassembles a global vector.
    """

    space: FiniteMeasureSpace
    family: MeasureFamily
    dspace: DirectIntegralSpace
    separated: bool

    @cached_property
    def _support_indices(self) -> tuple:
        return tuple(
            self.space.indices_of(self.family.fibers[z].support)
            for z in self.family.index.labels
        )

    def __call__(self, f) -> tuple:
        f = np.asarray(f, dtype=float)
        return tuple(f[idx] for idx in self._support_indices)

    def inverse(self, field) -> np.ndarray:
        if not self.separated:
            witness = is_separated(self.family)[1]
            raise NotSeparatedError(witness=witness)
        out = np.zeros(self.space.n)
        for idx, u in zip(self._support_indices, field):
            out[idx] = np.asarray(u, dtype=float)
        return out


def assemble_l2(space: FiniteMeasureSpace, family: MeasureFamily) -> L2Embedding:
    """Build the direct-sum L2 space of a family and its diagonal embedding."""
    dspace = DirectIntegralSpace(family.index, family.fiber_spaces())
    separated, _ = is_separated(family)
    return L2Embedding(space, family, dspace, separated)


@dataclass(frozen=True)
class LpIsometryReport:
    p: float
    norm_defect: float
    lattice_exact: bool
    trials: int


def assemble_lp(
    space: FiniteMeasureSpace,
    family: MeasureFamily,
    p: float,
    *,
    trials: int = 20,
    rng=None,
) -> LpIsometryReport:
    """Check the Lp isometry of the diagonal embedding for a separated family.

    For random test vectors f the report compares ||f||_p on the ambient
    space with (sum_z nu(z) ||f_z||_p^p)^(1/p) over the fibers, and verifies
    that the embedding commutes with the lattice operations exactly.

    Raises
    ------
    NotSeparatedError, InvalidExponentError
    """
    if p < 1:
        raise InvalidExponentError(f"p must satisfy p >= 1, got {p}")
    separated, witness = is_separated(family)
    if not separated:
        raise NotSeparatedError(witness=witness)
    embed = assemble_l2(space, family)
    rng = np.random.default_rng(0) if rng is None else rng

    defect = 0.0
    lattice_exact = True
    for _ in range(trials):
        f = rng.uniform(-1.0, 1.0, size=space.n)
        g = rng.uniform(-1.0, 1.0, size=space.n)
        fibered = sum(
            nu * fiber.lp_norm(u, p) ** p
            for nu, fiber, u in zip(
                family.index.nu, embed.dspace.fibers, embed(f)
            )
        ) ** (1.0 / p)
        defect = max(defect, abs(space.lp_norm(f, p) - fibered))
        meet = embed(np.minimum(f, g))
        for u, a, b in zip(meet, embed(f), embed(g)):
            if not np.array_equal(u, np.minimum(a, b)):
                lattice_exact = False
        pos = embed(np.maximum(f, 0.0))
        for u, a in zip(pos, embed(f)):
            if not np.array_equal(u, np.maximum(a, 0.0)):
                lattice_exact = False
    return LpIsometryReport(p, defect, lattice_exact, trials)


@dataclass(frozen=True, eq=False)
class DecomposableOperator:
    """A block family of fiber operators with its assembled global matrix."""

    dspace: DirectIntegralSpace
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(np.asarray(b, dtype=float) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if len(blocks) != self.dspace.index.size:
            raise FiberDimensionMismatchError("one block per fiber required")
        for b, d in zip(blocks, self.dspace.dims):
            if b.shape != (d, d):
                raise FiberDimensionMismatchError(
                    f"block shape {b.shape} does not match fiber dimension {d}"
                )

    @cached_property
    def assembled(self) -> np.ndarray:
        out = np.zeros((self.dspace.dim, self.dspace.dim))
        for i, b in enumerate(self.blocks):
            s = self.dspace.slice_of(i)
            out[s, s] = b
        return out

    @cached_property
    def operator_norm(self) -> float:
        """Norm in the direct-sum space; the ess-sup over fibers collapses to a max."""
        return max(
            weighted_operator_norm(b, f.mu)
            for b, f in zip(self.blocks, self.dspace.fibers)
        )

    def apply(self, field) -> tuple:
        return tuple(b @ np.asarray(u, dtype=float) for b, u in zip(self.blocks, field))


def assemble_operator(dspace: DirectIntegralSpace, blocks) -> DecomposableOperator:
    return DecomposableOperator(dspace, tuple(blocks))


def _quotient_dspace(qmap: QuotientMap) -> DirectIntegralSpace:
    _, family = disintegrate_over_partition(qmap.space, list(qmap.blocks.values()))
    return DirectIntegralSpace(family.index, family.fiber_spaces())


def decompose_operator(matrix, structure) -> DecomposableOperator:
    """Split an operator into fiber blocks, or fail with its off-block mass.

    Parameters
    ----------
    matrix : (n, n) array
        For a ``QuotientMap`` structure, an operator on L2(mu) in point
        coordinates; for a ``DirectIntegralSpace``, an operator in stacked
        coordinates.
    structure : QuotientMap or DirectIntegralSpace

    Raises
    ------
    NotDecomposableError
        If the off-block part has weighted operator norm above 1e-12
        relative to the matrix scale; the error carries the off-block norm.
    """
    matrix = np.asarray(matrix, dtype=float)
    if isinstance(structure, QuotientMap):
        dspace = _quotient_dspace(structure)
        index_groups = [structure.block_indices(z) for z in structure.index.labels]
        weights = structure.space.mu
    else:
        dspace = structure
        index_groups = [
            np.arange(dspace.offsets[i], dspace.offsets[i] + dspace.dims[i])
            for i in range(dspace.index.size)
        ]
        weights = dspace.stacked_weights

    block_part = np.zeros_like(matrix)
    blocks = []
    for idx in index_groups:
        blocks.append(matrix[np.ix_(idx, idx)])
        block_part[np.ix_(idx, idx)] = blocks[-1]
    off_norm = weighted_operator_norm(matrix - block_part, weights)
    scale = 1.0 + float(np.abs(matrix).max())
    if off_norm > _DECOMPOSABLE_RTOL * scale:
        raise NotDecomposableError(off_norm)
    return DecomposableOperator(dspace, tuple(blocks))


def diagonalizable(dspace: DirectIntegralSpace, values) -> DecomposableOperator:
    """The operator multiplying each fiber by a scalar function of the index.

    ``values`` is a mapping from index labels or a sequence aligned with
    them; the indicator of a label set yields the multiplication by the
    indicator of the corresponding point set.
    """
    if isinstance(values, dict):
        scalars = [float(values[z]) for z in dspace.index.labels]
    else:
        scalars = [float(v) for v in values]
        if len(scalars) != dspace.index.size:
            raise ValueError("one scalar per index label required")
    return DecomposableOperator(
        dspace, tuple(c * np.eye(d) for c, d in zip(scalars, dspace.dims))
    )


def commutes_with_diagonalizables(matrix, dspace: DirectIntegralSpace, *, tol: float = 1e-12):
    """Test commutation with every fiber-indicator multiplication operator.

    Commutation with all of them characterizes decomposability.  Returns
    ``(True, None)`` or ``(False, witness_label)`` with the label of the
    first indicator whose commutator does not vanish.
    """
    matrix = np.asarray(matrix, dtype=float)
    scale = 1.0 + float(np.abs(matrix).max())
    for i, z in enumerate(dspace.index.labels):
        ind = np.zeros(dspace.dim)
        ind[dspace.slice_of(i)] = 1.0
        commutator = matrix * ind[None, :] - ind[:, None] * matrix
        if weighted_operator_norm(commutator, dspace.stacked_weights) > tol * scale:
            return False, z
    return True, None


def functional_calculus(
    operator: DecomposableOperator, phi, *, degree: int = 50
) -> DecomposableOperator:
    """Apply a function to a decomposable operator, block by block.

    ``phi`` is either a sequence of power-basis polynomial coefficients
    (ascending) or a callable, in which case it is replaced by its Chebyshev
    interpolant of the given degree on [-||B||, ||B||] before evaluation.
    The same polynomial applied to the assembled matrix gives the identical
    operator, which is the content of the blockwise functional calculus.
    """
    if callable(phi):
        bound = max(operator.operator_norm, np.finfo(float).tiny)
        coef = chebyshev_coefficients(phi, bound, degree)
        blocks = tuple(chebyshev_matrix(b, coef, bound) for b in operator.blocks)
    else:
        coef = np.asarray(phi, dtype=float)
        blocks = tuple(polynomial_matrix(b, coef) for b in operator.blocks)
    return DecomposableOperator(operator.dspace, blocks)


@dataclass(frozen=True, eq=False)
class DirectIntegralForm:
    """The direct integral of a family of quadratic forms over the fibers.

    The assembled energy matrix in stacked coordinates is the block diagonal
    of nu(z) * A_z, so Q(u) = sum_z nu(z) E_z(u_z) holds exactly.
    """

    dspace: DirectIntegralSpace
    matrices: tuple

    def __post_init__(self):
        matrices = tuple(np.asarray(m, dtype=float) for m in self.matrices)
        object.__setattr__(self, "matrices", matrices)
        if len(matrices) != self.dspace.index.size:
            raise FiberDimensionMismatchError("one fiber form per index label required")
        for m, d in zip(matrices, self.dspace.dims):
            if m.shape != (d, d):
                raise FiberDimensionMismatchError(
                    f"fiber form shape {m.shape} does not match fiber dimension {d}"
                )

    @cached_property
    def assembled_matrix(self) -> np.ndarray:
        out = np.zeros((self.dspace.dim, self.dspace.dim))
        for i, (nu, m) in enumerate(zip(self.dspace.index.nu, self.matrices)):
            s = self.dspace.slice_of(i)
            out[s, s] = nu * m
        return out

    def energy(self, field) -> float:
        return float(
            sum(
                nu * (np.asarray(u) @ m @ np.asarray(u))
                for nu, m, u in zip(self.dspace.index.nu, self.matrices, field)
            )
        )

    @cached_property
    def _fiber_eigs(self) -> tuple:
        return tuple(
            symmetrized_eig(m, f.mu) for m, f in zip(self.matrices, self.dspace.fibers)
        )

    def is_dirichlet(self):
        """Markovianity of the assembled form, decided fiber by fiber.

        Returns ``(True, None)`` when every fiber form is Markovian, else
        ``(False, witness_field)`` where the witness is the lift of a
        contraction-violating vector from a bad fiber.
        """
        for i, (m, fiber) in enumerate(zip(self.matrices, self.dspace.fibers)):
            ok, payload = is_markovian(m, fiber)
            if not ok:
                field = [np.zeros(d) for d in self.dspace.dims]
                field[i] = payload
                return False, tuple(field)
        return True, None

    def semigroup(self, t: float) -> DecomposableOperator:
        blocks = tuple(semigroup_from_eig(e, t) for e in self._fiber_eigs)
        return DecomposableOperator(self.dspace, blocks)

    def resolvent(self, alpha: float) -> DecomposableOperator:
        blocks = tuple(resolvent_from_eig(e, alpha) for e in self._fiber_eigs)
        return DecomposableOperator(self.dspace, blocks)


def _fiber_matrix(entry, fiber: FiniteMeasureSpace) -> np.ndarray:
    if isinstance(entry, DirichletForm):
        if entry.space.points != fiber.points:
            raise FiberDimensionMismatchError("fiber form defined over the wrong fiber")
        return np.asarray(entry.matrix)
    m = np.asarray(entry, dtype=float)
    if m.shape != (fiber.n, fiber.n):
        raise FiberDimensionMismatchError(
            f"fiber form shape {m.shape} does not match fiber dimension {fiber.n}"
        )
    return m


def assemble_form(dspace: DirectIntegralSpace, fiber_forms) -> DirectIntegralForm:
    """Assemble per-fiber quadratic forms (matrices or Dirichlet forms)."""
    matrices = tuple(
        _fiber_matrix(entry, fiber) for entry, fiber in zip(fiber_forms, dspace.fibers)
    )
    if len(matrices) != dspace.index.size:
        raise FiberDimensionMismatchError("one fiber form per index label required")
    return DirectIntegralForm(dspace, matrices)


@dataclass(frozen=True, eq=False)
class SuperpositionResult:
    """A superposed form on the ambient space and its direct-integral twin."""

    energy_matrix: np.ndarray
    form: DirectIntegralForm
    embedding: L2Embedding
    isomorphism_defect: float

    def energy(self, f, g=None) -> float:
        f = np.asarray(f, dtype=float)
        g = f if g is None else np.asarray(g, dtype=float)
        return float(f @ self.energy_matrix @ g)


def superpose(
    space: FiniteMeasureSpace,
    family: MeasureFamily,
    fiber_forms,
    *,
    trials: int = 20,
    rng=None,
) -> SuperpositionResult:
    """Superpose fiber forms into a form on global functions.

    The superposition evaluates sum_z nu(z) E_z(f restricted to the fiber)
    directly on f in L2(mu).  For a separated family the diagonal embedding
    is a unitary lattice isomorphism between the superposition and the
    direct integral of the same fibers; the report carries the residual of
    that isomorphism on random vectors, measured through the graph norms.
    """
    separated, witness = is_separated(family)
    if not separated:
        raise NotSeparatedError(witness=witness)
    embed = assemble_l2(space, family)
    form = assemble_form(embed.dspace, fiber_forms)

    energy_matrix = np.zeros((space.n, space.n))
    for z, m in zip(family.index.labels, form.matrices):
        idx = space.indices_of(family.fibers[z].support)
        energy_matrix[np.ix_(idx, idx)] += family.index.weight(z) * m

    rng = np.random.default_rng(0) if rng is None else rng
    defect = 0.0
    for _ in range(trials):
        f = rng.uniform(-1.0, 1.0, size=space.n)
        field = embed(f)
        graph_ambient = float(f @ energy_matrix @ f) + space.norm(f) ** 2
        graph_fibered = form.energy(field) + embed.dspace.norm(field) ** 2
        defect = max(defect, abs(graph_ambient - graph_fibered))
    return SuperpositionResult(energy_matrix, form, embed, defect)
