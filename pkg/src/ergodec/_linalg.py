"""Shared dense linear algebra helpers.

Everything here works on the symmetrization D^{1/2} (-L) D^{-1/2} of a
generator, where D = diag(mu): that matrix equals D^{-1/2} A D^{-1/2} for an
energy matrix A, is symmetric, and a single eigendecomposition serves the
semigroup, the resolvent and the Yosida approximations at every parameter.
"""

from __future__ import annotations

import numpy as np


def symmetrized_eig(matrix: np.ndarray, mu: np.ndarray):
    """Eigendecomposition of D^{-1/2} A D^{-1/2}, D = diag(mu).

    Returns ``(w, V, sqrt_mu)`` with eigenvalues ``w`` clipped at zero (the
    operator is positive semidefinite up to roundoff) in ascending order.
    """
    sqrt_mu = np.sqrt(mu)
    sym = matrix / sqrt_mu[:, None] / sqrt_mu[None, :]
    w, v = np.linalg.eigh(sym)
    return np.clip(w, 0.0, None), v, sqrt_mu


def semigroup_from_eig(eig, t: float) -> np.ndarray:
    """e^{tL} from the symmetrized eigendecomposition of -L."""
    w, v, sqrt_mu = eig
    core = (v * np.exp(-t * w)) @ v.T
    return core / sqrt_mu[:, None] * sqrt_mu[None, :]


def resolvent_from_eig(eig, alpha: float) -> np.ndarray:
    """(alpha - L)^{-1} from the symmetrized eigendecomposition of -L."""
    w, v, sqrt_mu = eig
    core = (v / (alpha + w)) @ v.T
    return core / sqrt_mu[:, None] * sqrt_mu[None, :]


def weighted_operator_norm(matrix: np.ndarray, weights: np.ndarray) -> float:
    """Operator norm on the weighted L2 space with the given point weights."""
    s = np.sqrt(weights)
    return float(np.linalg.norm(matrix * s[:, None] / s[None, :], 2))


def polynomial_matrix(matrix: np.ndarray, coefficients) -> np.ndarray:
    """Evaluate a polynomial (ascending power-basis coefficients) at a matrix."""
    coefficients = np.asarray(coefficients, dtype=float)
    n = matrix.shape[0]
    out = coefficients[-1] * np.eye(n)
    for c in coefficients[-2::-1]:
        out = out @ matrix + c * np.eye(n)
    return out


def chebyshev_matrix(matrix: np.ndarray, coefficients, bound: float) -> np.ndarray:
    """Evaluate a Chebyshev series on [-bound, bound] at a matrix (Clenshaw)."""
    coefficients = np.asarray(coefficients, dtype=float)
    n = matrix.shape[0]
    eye = np.eye(n)
    scaled = matrix / bound
    if len(coefficients) == 1:
        return coefficients[0] * eye
    b1 = np.zeros_like(scaled)
    b2 = np.zeros_like(scaled)
    for c in coefficients[:0:-1]:
        b1, b2 = c * eye + 2.0 * (scaled @ b1) - b2, b1
    return coefficients[0] * eye + scaled @ b1 - b2


def chebyshev_coefficients(func, bound: float, degree: int) -> np.ndarray:
    """Chebyshev interpolation coefficients of ``func`` on [-bound, bound]."""
    series = np.polynomial.chebyshev.Chebyshev.interpolate(
        func, degree, domain=[-bound, bound]
    )
    return series.coef


def scatter_block(n: int, indices: np.ndarray, block: np.ndarray) -> np.ndarray:
    """Embed a block matrix at the given indices of an n x n zero matrix."""
    out = np.zeros((n, n))
    out[np.ix_(indices, indices)] = block
    return out
