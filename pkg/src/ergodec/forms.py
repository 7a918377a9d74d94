"""Dirichlet forms on finite weighted spaces.

A symmetric positive semidefinite matrix A over a finite measure space is a
Dirichlet (Markovian) energy matrix exactly when its off-diagonal entries are
nonpositive and its row sums are nonnegative.  Such a matrix is canonically
represented by a symmetric jump kernel J >= 0 and a killing vector k >= 0 via

    E(f, g) = 1/2 sum_{x,y} J(x,y) (f(x)-f(y)) (g(x)-g(y)) + sum_x k(x) f(x) g(x),

with J(x,y) = -A(x,y) off the diagonal and k(x) = sum_y A(x,y).  The generator
L = -diag(mu)^{-1} A is self-adjoint in L2(mu) and drives the sub-Markovian
semigroup e^{tL} and resolvent (alpha - L)^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from ._linalg import (
    resolvent_from_eig,
    semigroup_from_eig,
    symmetrized_eig,
)
from .errors import (
    HasKillingError,
    NegativeTimeError,
    NonPositiveAlphaError,
    NonPositiveBetaError,
    NonPositivePhiError,
    NotMarkovianError,
    NotPSDError,
)
from .spaces import FiniteMeasureSpace, _readonly

#: Relative threshold below which a jump weight does not join two components.
COMPONENT_THRESHOLD = 1e-12

_MARKOV_RTOL = 1e-14
_PSD_RTOL = 1e-12


def _matrix_scale(matrix) -> float:
    return 1.0 + float(np.abs(matrix).max())


def _contraction_energy_drop(matrix, f):
    """Energy gained by the unit contraction: Q(f+ ^ 1) - Q(f)."""
    g = np.clip(f, 0.0, 1.0)
    return float(g @ matrix @ g - f @ matrix @ f)


def is_markovian(matrix, space: FiniteMeasureSpace, *, tol: float | None = None):
    """Test the sub-Markov contraction property of a symmetric PSD matrix.

    Parameters
    ----------
    matrix : (n, n) array
        Symmetric (symmetrized defensively) positive semidefinite matrix.
    space : FiniteMeasureSpace
        The underlying space; fixes n.
    tol : float, optional
        Decision threshold; defaults to 1e-14 relative to the matrix scale.

    Returns
    -------
    (True, (jump, killing))
        When the unit contraction f -> (f v 0) ^ 1 never increases energy.
        ``jump`` is the symmetric nonnegative off-diagonal kernel, ``killing``
        the nonnegative row-sum vector; together they rebuild the matrix.
    (False, witness)
        Otherwise; ``witness`` is a vector f with Q(f+ ^ 1) > Q(f).

    Raises
    ------
    NotPSDError
        If the symmetrized matrix has an eigenvalue below -1e-12 * norm.
    """
    q = np.asarray(matrix, dtype=float)
    if q.shape != (space.n, space.n):
        raise ValueError("matrix shape does not match the space")
    q = 0.5 * (q + q.T)
    evals = np.linalg.eigvalsh(q)
    norm = float(np.abs(evals).max()) if evals.size else 0.0
    if evals[0] < -_PSD_RTOL * max(1.0, norm):
        raise NotPSDError(float(evals[0]))

    scale = _matrix_scale(q)
    tol = _MARKOV_RTOL * scale if tol is None else tol

    n = space.n
    off = q - np.diag(np.diag(q))
    row_sums = q.sum(axis=1)

    candidates = []
    # Positive off-diagonal entry: contract e_x - t e_y back to e_x.
    for x in range(n):
        for y in range(n):
            if x != y and off[x, y] > tol and q[y, y] > tol:
                f = np.zeros(n)
                f[x] = 1.0
                f[y] = -q[x, y] / q[y, y]
                candidates.append(f)
    # Negative row sum: push a constant above 1 at the offending point.
    for x in range(n):
        if row_sums[x] < -tol:
            f = np.ones(n)
            f[x] += -row_sums[x] / q[x, x] if q[x, x] > tol else 1.0
            candidates.append(f)

    if candidates:
        best = max(candidates, key=lambda f: _contraction_energy_drop(q, f))
        if _contraction_energy_drop(q, best) > 0:
            return False, best

    jump = np.where(~np.eye(n, dtype=bool), np.maximum(-q, 0.0), 0.0)
    killing = np.maximum(row_sums, 0.0)
    return True, (jump, killing)


@dataclass(frozen=True, eq=False)
class DirichletForm:
    """A validated Dirichlet energy matrix over a finite measure space.

    Construct through :meth:`from_matrix` or :meth:`from_jump_kernel`; the
    constructor enforces symmetry, positive semidefiniteness, Markovianity,
    and that the matrix is rebuilt by its jump/killing data.
    """

    space: FiniteMeasureSpace
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(self.matrix))
        a = self.matrix
        if a.shape != (self.space.n, self.space.n):
            raise ValueError("matrix shape does not match the space")
        scale = _matrix_scale(a)
        if np.abs(a - a.T).max() > 1e-13 * scale:
            raise ValueError("energy matrix must be symmetric")
        ok, payload = is_markovian(a, self.space)
        if not ok:
            raise NotMarkovianError(witness=payload)
        jump, killing = payload
        rebuilt = np.diag(jump.sum(axis=1) + killing) - jump
        if np.abs(rebuilt - a).max() > 1e-13 * scale:
            raise NotMarkovianError(message="jump/killing data does not rebuild the matrix")
        object.__setattr__(self, "_jump", _readonly(jump))
        object.__setattr__(self, "_killing", _readonly(killing))

    @classmethod
    def from_matrix(cls, space: FiniteMeasureSpace, matrix) -> "DirichletForm":
        matrix = np.asarray(matrix, dtype=float)
        return cls(space, 0.5 * (matrix + matrix.T))

    @classmethod
    def from_jump_kernel(cls, space: FiniteMeasureSpace, jump, killing=None) -> "DirichletForm":
        """Build the form of a symmetric jump kernel and optional killing vector."""
        jump = np.asarray(jump, dtype=float)
        jump = 0.5 * (jump + jump.T)
        np.fill_diagonal(jump, 0.0)  # a kernel carries no diagonal
        killing = np.zeros(space.n) if killing is None else np.asarray(killing, dtype=float)
        matrix = np.diag(jump.sum(axis=1) + killing) - jump
        return cls(space, matrix)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def jump(self) -> np.ndarray:
        return self._jump

    @property
    def killing(self) -> np.ndarray:
        return self._killing

    @property
    def killing_free(self) -> bool:
        """No killing beyond roundoff of the row sums."""
        return float(self._killing.max()) <= 1e-12 * _matrix_scale(self.matrix)

    @cached_property
    def generator(self) -> np.ndarray:
        """The matrix L = -diag(mu)^{-1} A, with E(f, g) = <-Lf, g> in L2(mu)."""
        gen = -self.matrix / self.space.mu[:, None]
        gen.flags.writeable = False
        return gen

    @cached_property
    def _eig(self):
        return symmetrized_eig(self.matrix, self.space.mu)

    @property
    def spectrum(self) -> np.ndarray:
        """Eigenvalues of -L in L2(mu), ascending; kernel dimension counts components."""
        return self._eig[0]

    def energy(self, f, g=None) -> float:
        f = np.asarray(f, dtype=float)
        g = f if g is None else np.asarray(g, dtype=float)
        return float(f @ self.matrix @ g)


def beurling_deny(form: DirichletForm):
    """The canonical (jump kernel, killing vector) pair of a Dirichlet form."""
    return form.jump, form.killing


def generator(form: DirichletForm) -> np.ndarray:
    return form.generator


def semigroup(form: DirichletForm, t: float) -> np.ndarray:
    """The sub-Markovian semigroup matrix e^{tL} at time t >= 0."""
    if t < 0:
        raise NegativeTimeError(f"time must be nonnegative, got {t}")
    return semigroup_from_eig(form._eig, t)


def resolvent(form: DirichletForm, alpha: float) -> np.ndarray:
    """The resolvent matrix (alpha - L)^{-1} for alpha > 0."""
    if alpha <= 0:
        raise NonPositiveAlphaError(f"alpha must be positive, got {alpha}")
    return resolvent_from_eig(form._eig, alpha)


@dataclass(frozen=True, eq=False)
class YosidaApproximation:
    """The Yosida regularization beta <f - beta G_beta f, g> of a form.

    Spectrally this replaces each eigenvalue lam of -L by beta*lam/(beta+lam),
    so the approximation increases monotonically to the energy as beta grows,
    with defect at most lam_max * E(f) / beta.
    """

    form: DirichletForm
    beta: float

    def energy(self, f, g=None) -> float:
        f = np.asarray(f, dtype=float)
        g = f if g is None else np.asarray(g, dtype=float)
        smoothed = self.beta * (f - self.beta * (resolvent(self.form, self.beta) @ f))
        return self.form.space.inner(smoothed, g)

    def __call__(self, f, g=None) -> float:
        return self.energy(f, g)


def yosida_form(form: DirichletForm, beta: float) -> YosidaApproximation:
    if beta <= 0:
        raise NonPositiveBetaError(f"beta must be positive, got {beta}")
    return YosidaApproximation(form, beta)


@dataclass(frozen=True, eq=False)
class CarreDuChamp:
    """Pointwise energy density of a Dirichlet form.

    gamma(f, g)(x) = [sum_y J(x,y)(f(x)-f(y))(g(x)-g(y)) + k(x) f(x) g(x)] / (2 mu(x)).

    The killing contribution keeps the product identity

        E(f, gh) + E(fh, g) - E(fg, h) = 2 * integral of h * gamma(f, g) d(mu)

    exact for every Markovian form; the price is that the integral of
    gamma(f, f) equals E(f) only when the killing vanishes.
    """

    form: DirichletForm

    def __call__(self, f, g=None) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        g = f if g is None else np.asarray(g, dtype=float)
        df = f[:, None] - f[None, :]
        dg = g[:, None] - g[None, :]
        jump_part = (self.form.jump * df * dg).sum(axis=1)
        return (jump_part + self.form.killing * f * g) / (2.0 * self.form.space.mu)

    def integral(self, f, g=None) -> float:
        return float(np.dot(self(f, g), self.form.space.mu))


def carre_du_champ(form: DirichletForm) -> CarreDuChamp:
    return CarreDuChamp(form)


@dataclass(frozen=True)
class InvarianceReport:
    """Defects of the four invariance criteria for one candidate subset."""

    defects: Mapping[str, float]
    tolerance: float
    invariant: bool


def is_invariant(form: DirichletForm, subset: Iterable, *, tol: float = 1e-10):
    """Test invariance of a point subset under the dynamics of a form.

    Evaluates the four finite-dimensional criteria: commutation of the
    semigroup with multiplication by the indicator (t in {0.3, 1}), leakage
    of the semigroup and of the resolvent (alpha in {1, 5}) out of the
    subset, and splitting of the energy across the subset and its
    complement.  The criteria are required to agree; the common verdict is
    returned together with the per-criterion defects.
    """
    labels = list(subset)
    mask = np.zeros(form.n, dtype=bool)
    if labels:
        mask[form.space.indices_of(labels)] = True
    scale = _matrix_scale(form.matrix)

    def off_block(m) -> float:
        if mask.all() or not mask.any():
            return 0.0
        return float(max(np.abs(m[np.ix_(~mask, mask)]).max(),
                         np.abs(m[np.ix_(mask, ~mask)]).max()))

    ts = (semigroup(form, 0.3), semigroup(form, 1.0))
    gs = (resolvent(form, 1.0), resolvent(form, 5.0))
    ind = np.diag(mask.astype(float))
    defects = {
        "semigroup_commutation": max(float(np.abs(t @ ind - ind @ t).max()) for t in ts),
        "semigroup_leakage": max(off_block(t) for t in ts),
        "resolvent_leakage": max(off_block(g) for g in gs),
        "energy_splitting": off_block(form.matrix),
    }
    verdicts = {k: v <= tol * scale for k, v in defects.items()}
    if len(set(verdicts.values())) != 1:
        raise RuntimeError(f"invariance criteria disagree: {defects}")
    verdict = next(iter(verdicts.values()))
    return verdict, InvarianceReport(defects, tol * scale, verdict)


def invariant_sets(form: DirichletForm) -> tuple:
    """The minimal invariant partition: connected components of the jump graph.

    A jump weight below ``COMPONENT_THRESHOLD`` times the largest weight is
    treated as zero so that numerically vanishing couplings cannot merge
    components.  Blocks are ordered by smallest point position.
    """
    jmax = float(form.jump.max())
    adjacency = form.jump > COMPONENT_THRESHOLD * jmax if jmax > 0 else np.zeros_like(form.jump, dtype=bool)
    n = form.n
    seen = np.zeros(n, dtype=bool)
    blocks = []
    for start in range(n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in np.flatnonzero(adjacency[x]):
                if not seen[y]:
                    seen[y] = True
                    stack.append(y)
        blocks.append(tuple(form.space.points[i] for i in sorted(comp)))
    return tuple(blocks)


def is_irreducible(form: DirichletForm) -> bool:
    """True when only the trivial subsets are invariant."""
    return len(invariant_sets(form)) == 1


def girsanov_transform(form: DirichletForm, phi) -> DirichletForm:
    """Reweight a killing-free form by a strictly positive density.

    The transformed form lives on L2(phi^2 mu) and has jump kernel
    J(x,y) * (phi(x)^2 + phi(y)^2) / 2, which realizes

        E_phi(f, g) = sum_x gamma(f, g)(x) phi(x)^2 mu(x)

    exactly.  Killing is refused: the reweighting identity needs the energy
    to be carried by jumps alone.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (form.n,):
        raise ValueError("density must be a vector over the points")
    if not np.all(phi > 0):
        raise NonPositivePhiError("density must be strictly positive")
    if not form.killing_free:
        raise HasKillingError("the reweighting transform requires a killing-free form")
    phi_sq = phi * phi
    weight = 0.5 * (phi_sq[:, None] + phi_sq[None, :])
    new_space = FiniteMeasureSpace(form.space.points, phi_sq * form.space.mu)
    return DirichletForm.from_jump_kernel(new_space, form.jump * weight)


@dataclass(frozen=True)
class ComponentClassification:
    points: tuple
    conservative: bool
    transient: bool
    recurrent: bool
    mass_defect: float
    energy_floor: float


@dataclass(frozen=True)
class Classification:
    """Global and per-component conservativeness / transience / recurrence flags."""

    conservative: bool
    transient: bool
    recurrent: bool
    per_component: Mapping[str, ComponentClassification]
    conservative_part: tuple
    transient_part: tuple


def classify(form: DirichletForm, *, tol: float = 1e-10) -> Classification:
    """Classify a form component by component.

    On a connected finite component the three notions collapse to the
    presence of killing: no killing gives a conservative recurrent block
    (the constant has zero energy), any killing gives a transient one (the
    restricted energy matrix is positive definite).  Each verdict is cross
    checked against the semigroup: mass preservation of T_1 on the block for
    conservativeness, the smallest restricted eigenvalue for transience.
    Global flags are the conjunction over the components, and the space
    splits as the union of recurrent blocks plus the union of transient
    blocks, with nothing left over.
    """
    blocks = invariant_sets(form)
    scale = _matrix_scale(form.matrix)
    t1_mass = semigroup(form, 1.0) @ np.ones(form.n)

    per = {}
    cons_points, trans_points = [], []
    for i, block in enumerate(blocks):
        idx = form.space.indices_of(block)
        killing_free = form.killing[idx].max(initial=0.0) <= 1e-12 * scale
        mass_defect = float(np.abs(t1_mass[idx] - 1.0).max())
        energy_floor = float(np.linalg.eigvalsh(form.matrix[np.ix_(idx, idx)])[0])
        conservative = mass_defect <= tol
        transient = energy_floor > 1e-12 * scale
        if conservative != killing_free or transient == killing_free:
            raise RuntimeError(f"classification criteria disagree on block {block}")
        per[f"z{i}"] = ComponentClassification(
            block, conservative, transient, not transient, mass_defect, energy_floor
        )
        (cons_points if not transient else trans_points).extend(block)

    return Classification(
        conservative=all(c.conservative for c in per.values()),
        transient=all(c.transient for c in per.values()),
        recurrent=all(c.recurrent for c in per.values()),
        per_component=per,
        conservative_part=tuple(cons_points),
        transient_part=tuple(trans_points),
    )
