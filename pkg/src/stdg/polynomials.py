"""Orthonormal modal bases on the reference triangle and quadrature rules.

The reference triangle is ``{(xi, eta): xi >= 0, eta >= 0, xi + eta <= 1}``
(area 1/2).  Bases are obtained by Gram-Schmidt (a Cholesky factorization of
the exact monomial Gram matrix, carried out in extended precision) so that the
reference mass matrix is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import mpmath
import numpy as np
from scipy.special import roots_jacobi, roots_legendre

MAX_QUADRATURE_ORDER = 40


class GeometryError(ValueError):
    """Raised for degenerate (singular) element maps."""


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, values):
        return np.tensordot(self.weights, values, axes=(0, 0))


def _check_order(order):
    if order < 1 or order > MAX_QUADRATURE_ORDER:
        raise ValueError(
            f"quadrature order {order} outside implemented range "
            f"[1, {MAX_QUADRATURE_ORDER}]")


@lru_cache(maxsize=None)
def segment_rule(order: int) -> QuadratureRule:
    """Gauss-Legendre rule on ``[0, 1]`` exact for degree ``order``."""
    _check_order(order)
    n = order // 2 + 1
    x, w = roots_legendre(n)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, order)


@lru_cache(maxsize=None)
def triangle_rule(order: int) -> QuadratureRule:
    """Collapsed Gauss-Jacobi rule on the reference triangle.

    Uses ``n = order // 2 + 1`` points per direction, exact for total degree
    ``2n - 1 >= order``.  All weights are positive.
    """
    _check_order(order)
    n = order // 2 + 1
    # xi carries the Duffy Jacobian (1 - xi) as a Jacobi weight
    r, wr = roots_jacobi(n, 1.0, 0.0)
    s, ws = roots_legendre(n)
    xi = 0.5 * (r + 1.0)
    wxi = wr / 4.0
    s01 = 0.5 * (s + 1.0)
    ws01 = 0.5 * ws
    XI, S = np.meshgrid(xi, s01, indexing="ij")
    eta = S * (1.0 - XI)
    pts = np.column_stack([XI.ravel(), eta.ravel()])
    wts = np.outer(wxi, ws01).ravel()
    return QuadratureRule(pts, wts, order)


def basis_dim(q: int) -> int:
    return (q + 1) * (q + 2) // 2


def _exponents(q):
    return [(d - j, j) for d in range(q + 1) for j in range(d + 1)]


@lru_cache(maxsize=None)
def _orthonormal_coefficients(q):
    # monomials are centred at the reference centroid for conditioning
    with mpmath.workdps(50):
        return _gram_schmidt(_exponents(q))


def _gram_schmidt(exps):
    third = mpmath.mpf(1) / 3

    def mono_integral(a, b):
        # exact integral of (xi - 1/3)^a (eta - 1/3)^b over the reference triangle
        total = mpmath.mpf(0)
        for i in range(a + 1):
            for j in range(b + 1):
                c = mpmath.binomial(a, i) * mpmath.binomial(b, j)
                c *= (-third) ** (a - i) * (-third) ** (b - j)
                total += c * mpmath.mpf(factorial(i) * factorial(j)) / factorial(i + j + 2)
        return total

    n = len(exps)
    gram = mpmath.matrix(n, n)
    for r, (a1, b1) in enumerate(exps):
        for c, (a2, b2) in enumerate(exps):
            gram[r, c] = mono_integral(a1 + a2, b1 + b2)
    chol = mpmath.cholesky(gram)
    inv = chol ** -1
    coef = np.array([[float(inv[i, j]) for j in range(n)] for i in range(n)])
    return coef, tuple(exps)


class SimplexBasis:
    """Orthonormal basis of total degree ``q`` on the reference triangle.

    Mode 0 is the constant ``sqrt(2)``; modes are graded by degree.
    """

    def __init__(self, q: int):
        if q < 0:
            raise ValueError("degree must be nonnegative")
        self.q = q
        self.dim = basis_dim(q)
        self.coef, self.exponents = _orthonormal_coefficients(q)
        self._ex = np.array([e[0] for e in self.exponents])
        self._ey = np.array([e[1] for e in self.exponents])

    def _monomials(self, pts, dx=0, dy=0):
        pts = np.asarray(pts, dtype=float)
        X = pts[..., 0, None] - 1.0 / 3.0
        Y = pts[..., 1, None] - 1.0 / 3.0
        # falling factorials vanish for exponents below the derivative order
        cx = np.prod([self._ex - i for i in range(dx)], axis=0) if dx else 1.0
        cy = np.prod([self._ey - i for i in range(dy)], axis=0) if dy else 1.0
        return cx * cy * X ** np.maximum(self._ex - dx, 0) \
            * Y ** np.maximum(self._ey - dy, 0)

    def eval(self, pts):
        """Basis values, shape ``pts.shape[:-1] + (dim,)``."""
        return self._monomials(pts) @ self.coef.T

    def eval_ref_grad(self, pts):
        """Reference gradients, shape ``pts.shape[:-1] + (dim, 2)``."""
        gx = self._monomials(pts, dx=1) @ self.coef.T
        gy = self._monomials(pts, dy=1) @ self.coef.T
        return np.stack([gx, gy], axis=-1)

    def eval_ref_hessian(self, pts):
        """Reference second derivatives ``(d2/dxi2, d2/dxi deta, d2/deta2)``."""
        hxx = self._monomials(pts, dx=2) @ self.coef.T
        hxy = self._monomials(pts, dx=1, dy=1) @ self.coef.T
        hyy = self._monomials(pts, dy=2) @ self.coef.T
        return np.stack([hxx, hxy, hyy], axis=-1)


@dataclass(frozen=True)
class AffineMap:
    """Map ``X = origin + jac @ ref`` from the reference triangle to ``(t, x)``."""

    origin: np.ndarray
    jac: np.ndarray

    @classmethod
    def from_vertices(cls, verts):
        verts = np.asarray(verts, dtype=float)
        jac = np.column_stack([verts[1] - verts[0], verts[2] - verts[0]])
        return cls(verts[0].copy(), jac)

    @property
    def det(self):
        return float(np.linalg.det(self.jac))

    def inverse_jacobian(self):
        det = self.det
        scale = np.abs(self.jac).max()
        if abs(det) <= 1e-14 * scale * scale:
            raise GeometryError("singular element Jacobian")
        return np.linalg.inv(self.jac)

    def to_physical(self, ref):
        return self.origin + np.asarray(ref) @ self.jac.T

    def to_reference(self, pts):
        return (np.asarray(pts) - self.origin) @ self.inverse_jacobian().T


def eval_basis(basis: SimplexBasis, ref_point):
    return basis.eval(ref_point)


def eval_grad(basis: SimplexBasis, ref_point, affine_map: AffineMap):
    """Physical gradients ``(dim, 2)`` ordered as ``(d/dt, d/dx)``."""
    inv = affine_map.inverse_jacobian()
    return basis.eval_ref_grad(ref_point) @ inv


def solver_quadrature_order(q: int, polynomial_flux_degree: int | None) -> int:
    """Quadrature order used for all residual integrals.

    ``None`` marks a non-polynomial flux, integrated with ``3q + 4``.
    """
    if polynomial_flux_degree is None:
        return 3 * q + 4
    return max(3 * q + 2, 2 * q + polynomial_flux_degree)
