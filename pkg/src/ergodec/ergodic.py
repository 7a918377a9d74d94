"""Ergodic decomposition pipelines for Dirichlet forms on finite spaces.

``decompose`` splits a form over its minimal invariant partition into
irreducible fiber forms on probability fibers; ``decompose_weighted`` runs
the same split through a strictly positive reweighting density and undoes
the reweighting fiberwise, which is unique only up to the projective factor
between the induced index measures.  Invariant measures of the semigroup
are mixtures of the per-fiber stationary measures, and the classification
of the global form is the conjunction of the fiber classifications.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from ._linalg import scatter_block
from .direct_integral import assemble_l2
from .errors import (
    HasKillingError,
    NonPositivePhiError,
    NotInvariantError,
    PartitionMismatchError,
)
from .forms import (
    Classification,
    DirichletForm,
    carre_du_champ,
    classify,
    girsanov_transform,
    invariant_sets,
    resolvent,
    semigroup,
)
from .spaces import (
    FiniteMeasureSpace,
    MeasureFamily,
    QuotientMap,
    disintegrate_over_partition,
)


@dataclass(frozen=True, eq=False)
class ErgodicDecomposition:
    """A Dirichlet form split over its minimal invariant partition.

    The quotient and family live over the probability-normalized measure
    (the total mass is recorded in ``normalization_scale``); the fiber data
    does not depend on the normalization.  Each fiber form is the Dirichlet
    form of the restricted semigroup on L2 of its probability fiber measure,
    so the fiber generators are exactly the diagonal blocks of the global
    generator and

        E(f) = normalization_scale * sum_z nu(z) E_z(f restricted to z)

    holds exactly.
    """

    form: DirichletForm
    quotient: QuotientMap
    family: MeasureFamily
    fibers: tuple
    normalization_scale: float
    residuals: Mapping[str, float]

    @property
    def labels(self) -> tuple:
        return self.quotient.index.labels

    @cached_property
    def fiber_forms(self) -> dict:
        return dict(zip(self.labels, self.fibers))

    def restrict(self, f) -> tuple:
        """Restrict a global vector to every fiber, in index order."""
        f = np.asarray(f, dtype=float)
        return tuple(f[self.quotient.block_indices(z)] for z in self.labels)

    def reassembled_energy(self, f, g=None) -> float:
        f = np.asarray(f, dtype=float)
        g = f if g is None else np.asarray(g, dtype=float)
        total = 0.0
        for z, fiber in zip(self.labels, self.fibers):
            idx = self.quotient.block_indices(z)
            total += self.quotient.index.weight(z) * fiber.energy(f[idx], g[idx])
        return self.normalization_scale * total

    def reassembled_matrix(self) -> np.ndarray:
        n = self.form.n
        out = np.zeros((n, n))
        for z, fiber in zip(self.labels, self.fibers):
            idx = self.quotient.block_indices(z)
            out += self.quotient.index.weight(z) * scatter_block(n, idx, fiber.matrix)
        return self.normalization_scale * out


def decompose(form: DirichletForm) -> ErgodicDecomposition:
    """Split a Dirichlet form into irreducible fibers over its invariant partition.

    The measure is normalized to a probability internally and the scale is
    recorded; only the index weights depend on the scale.  Fiber energy
    matrices are the diagonal blocks of the energy matrix divided by the raw
    block mass, which is the unique choice making the fiber semigroups the
    blocks of the global semigroup on the probability fibers (validated via
    the generator blocks at construction).
    """
    partition = invariant_sets(form)
    scale = form.space.total_mass
    qmap, family = disintegrate_over_partition(form.space.normalized(), partition)

    fibers = []
    generator_defect = 0.0
    for z in qmap.index.labels:
        block = qmap.blocks[z]
        idx = form.space.indices_of(block)
        raw_mass = float(form.space.mu[idx].sum())
        fiber_space = family.fibers[z].as_space()
        fiber = DirichletForm.from_matrix(
            fiber_space, form.matrix[np.ix_(idx, idx)] / raw_mass
        )
        block_generator = form.generator[np.ix_(idx, idx)]
        generator_defect = max(
            generator_defect, float(np.abs(fiber.generator - block_generator).max())
        )
        fibers.append(fiber)

    dec = ErgodicDecomposition(
        form=form,
        quotient=qmap,
        family=family,
        fibers=tuple(fibers),
        normalization_scale=scale,
        residuals={},
    )
    reassembly_defect = float(np.abs(dec.reassembled_matrix() - form.matrix).max())
    object.__setattr__(
        dec,
        "residuals",
        {"form_reassembly": reassembly_defect, "fiber_generator": generator_defect},
    )
    return dec


@dataclass(frozen=True)
class DecompositionReport:
    """Residual norms of the identities a decomposition must satisfy."""

    form_defect: float
    semigroup_defects: Mapping[float, float]
    resolvent_defects: Mapping[float, float]
    isometry_defect: float
    fibers_irreducible: tuple
    tolerance: float
    passed: bool

    def worst(self) -> float:
        return max(
            self.form_defect,
            max(self.semigroup_defects.values()),
            max(self.resolvent_defects.values()),
            self.isometry_defect,
        )


def verify_decomposition(
    dec: ErgodicDecomposition,
    *,
    tolerance: float = 1e-10,
    times=(0.1, 1.0, 10.0),
    alphas=(0.5, 1.0, 10.0),
    trials: int = 20,
    rng=None,
) -> DecompositionReport:
    """Re-derive the decomposition identities and report their residuals.

    Checks the energy reassembly on the standard basis, the blockwise
    splitting of the semigroup and the resolvent at the given parameters,
    the isometry of the diagonal embedding on random vectors, and that each
    fiber is irreducible.  Passes when every residual is at or below the
    tolerance.
    """
    form = dec.form
    n = form.n
    scale = 1.0 + float(np.abs(form.matrix).max())
    form_defect = float(np.abs(dec.reassembled_matrix() - form.matrix).max()) / scale

    block_indices = [dec.quotient.block_indices(z) for z in dec.labels]

    semi_defects = {}
    for t in times:
        global_t = semigroup(form, t)
        assembled = np.zeros((n, n))
        for idx, fiber in zip(block_indices, dec.fibers):
            assembled += scatter_block(n, idx, semigroup(fiber, t))
        semi_defects[t] = float(np.linalg.norm(global_t - assembled, "fro"))

    res_defects = {}
    for a in alphas:
        global_g = resolvent(form, a)
        assembled = np.zeros((n, n))
        for idx, fiber in zip(block_indices, dec.fibers):
            assembled += scatter_block(n, idx, resolvent(fiber, a))
        res_defects[a] = float(np.linalg.norm(global_g - assembled, "fro"))

    rng = np.random.default_rng(0) if rng is None else rng
    normalized = dec.quotient.space
    embed = assemble_l2(normalized, dec.family)
    isometry_defect = 0.0
    for _ in range(trials):
        f = rng.uniform(-1.0, 1.0, size=n)
        isometry_defect = max(
            isometry_defect, abs(embed.dspace.norm(embed(f)) - normalized.norm(f))
        )

    irreducible = tuple(len(invariant_sets(fiber)) == 1 for fiber in dec.fibers)
    passed = (
        form_defect <= tolerance
        and max(semi_defects.values()) <= max(tolerance, 1e-8)
        and max(res_defects.values()) <= tolerance
        and isometry_defect <= tolerance
        and all(irreducible)
    )
    return DecompositionReport(
        form_defect, semi_defects, res_defects, isometry_defect, irreducible,
        tolerance, passed,
    )


@dataclass(frozen=True)
class CarreDecompositionReport:
    restriction_defect: float
    integral_defect: float
    product_identity_defect: float


def carre_decomposition(
    dec: ErgodicDecomposition, *, trials: int = 20, rng=None
) -> tuple[tuple, CarreDecompositionReport]:
    """Per-fiber energy densities of a decomposition, with their residuals.

    The fiber density of a restricted vector agrees pointwise with the
    global density on the fiber (the index weight scales the kernel and the
    measure oppositely and cancels).  The report also carries, for
    killing-free fibers, the defect of integrating the density against the
    fiber measure versus the fiber energy, and the worst defect of the
    product identity on random triples per fiber.
    """
    gamma = carre_du_champ(dec.form)
    fiber_gammas = tuple(carre_du_champ(fiber) for fiber in dec.fibers)
    rng = np.random.default_rng(0) if rng is None else rng
    n = dec.form.n

    restriction = 0.0
    integral = 0.0
    product = 0.0
    for _ in range(trials):
        f = rng.uniform(-1.0, 1.0, size=n)
        g = rng.uniform(-1.0, 1.0, size=n)
        h = rng.uniform(-1.0, 1.0, size=n)
        global_density = gamma(f, g)
        for z, fiber, fg in zip(dec.labels, dec.fibers, fiber_gammas):
            idx = dec.quotient.block_indices(z)
            fz, gz, hz = f[idx], g[idx], h[idx]
            restriction = max(
                restriction, float(np.abs(fg(fz, gz) - global_density[idx]).max())
            )
            if fiber.killing_free:
                integral = max(integral, abs(fg.integral(fz) - fiber.energy(fz)))
            lhs = (
                fiber.energy(fz, gz * hz)
                + fiber.energy(fz * hz, gz)
                - fiber.energy(fz * gz, hz)
            )
            rhs = 2.0 * float(np.dot(hz * fg(fz, gz), fiber.space.mu))
            product = max(product, abs(lhs - rhs))
    return fiber_gammas, CarreDecompositionReport(restriction, integral, product)


@dataclass(frozen=True, eq=False)
class WeightedDecomposition:
    """A decomposition through a positive density, with the reweighting undone.

    ``base`` is the plain decomposition of the transformed form on
    L2(phi^2 mu).  The lifted fiber measures divide the density back out and
    are sigma-finite rather than probabilities; the lifted fiber forms are
    the inverse transforms of the fiber forms under the density restricted
    to each fiber.  Reassembly of the original energy is exact, and two
    densities give the same fibers up to the ratio of their index measures.
    """

    form: DirichletForm
    density: np.ndarray
    base: ErgodicDecomposition
    lifted_measures: tuple
    lifted_forms: tuple
    residuals: Mapping[str, float]

    @property
    def labels(self) -> tuple:
        return self.base.labels

    @property
    def index_weights(self) -> np.ndarray:
        return self.base.quotient.index.nu

    def reassembled_energy(self, f, g=None) -> float:
        f = np.asarray(f, dtype=float)
        g = f if g is None else np.asarray(g, dtype=float)
        total = 0.0
        for z, fiber in zip(self.labels, self.lifted_forms):
            idx = self.base.quotient.block_indices(z)
            total += self.base.quotient.index.weight(z) * fiber.energy(f[idx], g[idx])
        return total


def decompose_weighted(form: DirichletForm, phi) -> WeightedDecomposition:
    """Decompose a killing-free form through a strictly positive density.

    The density is normalized to unit L2(mu) norm, so the transformed
    measure is a probability and the base decomposition needs no further
    rescaling.  Undoing the transform divides the fiber measures by the
    squared density pointwise and divides the fiber jump kernels by the
    edge reweighting factor; for a density constant on each fiber this is
    the same as transforming by the reciprocal density.  The invariant
    partition always equals the unweighted one.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (form.n,):
        raise ValueError("density must be a vector over the points")
    if not np.all(phi > 0):
        raise NonPositivePhiError("density must be strictly positive")
    if not form.killing_free:
        raise HasKillingError("weighted decomposition requires a killing-free form")
    phi = phi / form.space.norm(phi)

    transformed = girsanov_transform(form, phi)
    base = decompose(transformed)

    lifted_measures = []
    lifted_forms = []
    reassembly_defect = 0.0
    for z, fiber in zip(base.labels, base.fibers):
        idx = form.space.indices_of(base.quotient.blocks[z])
        phi_sq = phi[idx] ** 2
        measure = fiber.space.mu / phi_sq
        reweight = 0.5 * (phi_sq[:, None] + phi_sq[None, :])
        lifted_space = FiniteMeasureSpace(fiber.space.points, measure)
        lifted = DirichletForm.from_jump_kernel(lifted_space, fiber.jump / reweight)
        lifted_measures.append(measure)
        lifted_forms.append(lifted)

    dec = WeightedDecomposition(
        form=form,
        density=phi,
        base=base,
        lifted_measures=tuple(lifted_measures),
        lifted_forms=tuple(lifted_forms),
        residuals={},
    )
    reassembled = np.zeros((form.n, form.n))
    for z, fiber in zip(dec.labels, dec.lifted_forms):
        idx = base.quotient.block_indices(z)
        reassembled += base.quotient.index.weight(z) * scatter_block(
            form.n, idx, fiber.matrix
        )
    reassembly_defect = float(np.abs(reassembled - form.matrix).max())
    object.__setattr__(dec, "residuals", {"form_reassembly": reassembly_defect})
    return dec


@dataclass(frozen=True)
class ProjectiveComparison:
    """The change-of-density factor between two weighted decompositions."""

    density_ratio: np.ndarray
    measure_defect: float
    form_defect: float

    @property
    def defect(self) -> float:
        return max(self.measure_defect, self.form_defect)


def compare_projective(
    dec_phi: WeightedDecomposition, dec_psi: WeightedDecomposition
) -> ProjectiveComparison:
    """Compare two weighted decompositions of the same form.

    The partitions must coincide; the comparison returns the ratio
    g = nu_psi / nu_phi on the index space and checks that the lifted fiber
    measures match under g and the lifted fiber forms under 1/g:

        mu_z[phi] = g(z) * mu_z[psi],      E_z[psi] = (1/g(z)) * E_z[phi].

    Raises
    ------
    PartitionMismatchError
        If the two decompositions do not share the invariant partition.
    """
    blocks_phi = [dec_phi.base.quotient.blocks[z] for z in dec_phi.labels]
    blocks_psi = [dec_psi.base.quotient.blocks[z] for z in dec_psi.labels]
    if blocks_phi != blocks_psi:
        raise PartitionMismatchError("decompositions disagree on the invariant partition")

    ratio = dec_psi.index_weights / dec_phi.index_weights
    measure_defect = 0.0
    form_defect = 0.0
    for g, m_phi, m_psi, f_phi, f_psi in zip(
        ratio,
        dec_phi.lifted_measures,
        dec_psi.lifted_measures,
        dec_phi.lifted_forms,
        dec_psi.lifted_forms,
    ):
        measure_defect = max(measure_defect, float(np.abs(m_phi - g * m_psi).max()))
        form_defect = max(
            form_defect, float(np.abs(f_psi.matrix - f_phi.matrix / g).max())
        )
    return ProjectiveComparison(ratio, measure_defect, form_defect)


@dataclass(frozen=True, eq=False)
class ErgodicMeasure:
    """A normalized invariant measure carried by one recurrent component."""

    component: tuple
    weights: np.ndarray


def ergodic_measures(form: DirichletForm, *, tol: float = 1e-10) -> tuple:
    """All ergodic invariant probability measures of the semigroup.

    The invariant densities form the kernel of the generator: constants on
    each killing-free component, zero on components carrying killing.  The
    ergodic ones are the normalized restrictions of the reference measure
    to the killing-free components; invariance of each returned measure is
    verified against the semigroup on the standard basis.
    """
    t1 = semigroup(form, 1.0)
    out = []
    for z, comp in classify(form).per_component.items():
        if comp.transient:
            continue
        idx = form.space.indices_of(comp.points)
        weights = np.zeros(form.n)
        weights[idx] = form.space.mu[idx] / form.space.mu[idx].sum()
        defect = float(np.abs(t1.T @ weights - weights).max())
        if defect > tol:
            raise RuntimeError(f"stationarity check failed on component {comp.points}")
        out.append(ErgodicMeasure(comp.points, weights))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class InvariantMeasureMixture:
    """An invariant measure written as a mixture of ergodic ones."""

    ergodic: tuple
    weights: np.ndarray
    reconstruction_defect: float

    def reconstructed(self) -> np.ndarray:
        out = np.zeros_like(self.ergodic[0].weights) if self.ergodic else np.zeros(0)
        for w, lam in zip(self.weights, self.ergodic):
            out = out + w * lam.weights
        return out

    @property
    def support(self) -> tuple:
        """Positions of the ergodic measures carrying positive mixture mass."""
        return tuple(int(i) for i in np.flatnonzero(self.weights > 0))


def decompose_invariant_measure(
    form: DirichletForm, eta, *, tol: float = 1e-10
) -> InvariantMeasureMixture:
    """Write an invariant measure as a mixture of the ergodic measures.

    The measure is checked for invariance under the time-one semigroup on
    the standard basis first; the mixture weight of an ergodic component is
    the total mass the measure gives it, and the reconstruction is exact.

    Raises
    ------
    NotInvariantError
        If the invariance defect exceeds the tolerance; carries the defect.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (form.n,):
        raise ValueError("measure must be a weight vector over the points")
    if np.any(eta < 0):
        raise ValueError("measure weights must be nonnegative")
    t1 = semigroup(form, 1.0)
    defect = float(np.abs(t1.T @ eta - eta).max())
    if defect > tol * max(1.0, float(eta.max(initial=0.0))):
        raise NotInvariantError(defect)

    measures = ergodic_measures(form)
    weights = np.array(
        [float(eta[form.space.indices_of(m.component)].sum()) for m in measures]
    )
    mixture = InvariantMeasureMixture(measures, weights, 0.0)
    rec = mixture.reconstructed() if measures else np.zeros(form.n)
    rec_defect = float(np.abs(rec - eta).max())
    object.__setattr__(mixture, "reconstruction_defect", rec_defect)
    return mixture


@dataclass(frozen=True)
class MixtureRelations:
    """Absolute continuity and singularity of two invariant measures.

    The flags are computed twice, once from the supports of the measures on
    the points and once from the supports of their mixture weights; the two
    computations must agree, which is the finite form of the correspondence
    between invariant measures and their mixing measures.
    """

    ac_forward: bool
    ac_backward: bool
    mutually_singular: bool
    consistent: bool


def invariant_measure_relations(
    form: DirichletForm, mix_a: InvariantMeasureMixture, mix_b: InvariantMeasureMixture
) -> MixtureRelations:
    sa, sb = set(mix_a.support), set(mix_b.support)
    ac_forward = sa <= sb
    ac_backward = sb <= sa
    singular = not (sa & sb)

    pa = set(np.flatnonzero(mix_a.reconstructed() > 0))
    pb = set(np.flatnonzero(mix_b.reconstructed() > 0))
    consistent = (
        (pa <= pb) == ac_forward
        and (pb <= pa) == ac_backward
        and (not (pa & pb)) == singular
    )
    return MixtureRelations(ac_forward, ac_backward, singular, consistent)


@dataclass(frozen=True)
class DecompositionClassification:
    """Global classification next to the per-fiber ones, with the splitting."""

    overall: Classification
    per_fiber: tuple
    conservative_part: tuple
    transient_part: tuple
    consistent: bool


def classification_decomposition(dec: ErgodicDecomposition) -> DecompositionClassification:
    """Classify a decomposition fiber by fiber and check the global equivalences.

    Conservativeness, transience and recurrence of the global form must each
    equal the conjunction of the fiber flags; the space splits into the
    union of recurrent fibers and the union of transient fibers with no
    exceptional remainder.
    """
    overall = classify(dec.form)
    per_fiber = tuple(classify(fiber) for fiber in dec.fibers)
    consistent = (
        overall.conservative == all(c.conservative for c in per_fiber)
        and overall.transient == all(c.transient for c in per_fiber)
        and overall.recurrent == all(c.recurrent for c in per_fiber)
    )
    cons, trans = [], []
    for z, c in zip(dec.labels, per_fiber):
        block = dec.quotient.blocks[z]
        (cons if c.recurrent else trans).extend(block)
    return DecompositionClassification(
        overall, per_fiber, tuple(cons), tuple(trans), consistent
    )
