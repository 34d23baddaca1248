"""Element-local H^1 projection onto P^q with a mean-value gauge.

``Pi g`` solves the Neumann problem

    int_k grad(Pi g - g) . grad w = 0   for all w in P^q(k),
    int_k (Pi g - g) = 0,

written as a bordered (saddle-point) system so the constant null space of the
stiffness matrix is closed explicitly.
"""

from __future__ import annotations

import numpy as np

from .polynomials import AffineMap, SimplexBasis, segment_rule, triangle_rule

_REF_EDGES = np.array([[[0.0, 0.0], [1.0, 0.0]],
                       [[1.0, 0.0], [0.0, 1.0]],
                       [[0.0, 1.0], [0.0, 0.0]]])


def _physical_hessians(basis, ref_pts, inv):
    """Physical second derivatives ``(..., dim, 2, 2)`` of the basis."""
    h = basis.eval_ref_hessian(ref_pts)
    H = np.stack([np.stack([h[..., 0], h[..., 1]], -1),
                  np.stack([h[..., 1], h[..., 2]], -1)], -2)
    return np.einsum("ri,...nrs,sj->...nij", inv, H, inv)


def stiffness_matrix(basis: SimplexBasis, amap: AffineMap, order=None):
    inv = amap.inverse_jacobian()
    rule = triangle_rule(order or max(2 * basis.q, 1))
    g = basis.eval_ref_grad(rule.points) @ inv
    return abs(amap.det) * np.einsum("q,qid,qjd->ij", rule.weights, g, g)


def h1_project(g, amap: AffineMap, q: int, order: int, grad=None):
    """Coefficients of ``Pi g`` in the orthonormal basis of ``P^q(k)``.

    ``g(t, x)`` is evaluated at physical points.  When ``grad`` (returning
    the pair ``(g_t, g_x)``) is omitted the load vector is formed by
    integration by parts, ``-int g lap w + int_dk g dw/dn``, so that ``g``
    need only be pointwise evaluable.  ``order`` is the quadrature order
    for products of ``g`` with polynomials of degree ``q``.
    """
    basis = SimplexBasis(q)
    inv = amap.inverse_jacobian()
    det = abs(amap.det)
    rule = triangle_rule(max(order, 2 * q))
    pts = amap.to_physical(rule.points)
    phi = basis.eval(rule.points)
    dphi = basis.eval_ref_grad(rule.points) @ inv
    gv = np.asarray(g(pts[:, 0], pts[:, 1]), dtype=float)

    if grad is not None:
        gt, gx = grad(pts[:, 0], pts[:, 1])
        gg = np.stack([np.asarray(gt, float), np.asarray(gx, float)], axis=-1)
        load = det * np.einsum("q,qd,qnd->n", rule.weights, gg, dphi)
    else:
        hess = _physical_hessians(basis, rule.points, inv)
        lap = hess[..., 0, 0] + hess[..., 1, 1]
        load = -det * np.einsum("q,q,qn->n", rule.weights, gv, lap)
        seg = segment_rule(max(order, 2 * q))
        for ref_a, ref_b in _REF_EDGES:
            ref = ref_a + seg.points[:, None] * (ref_b - ref_a)
            pa, pb = amap.to_physical(ref_a), amap.to_physical(ref_b)
            d = pb - pa
            length = float(np.hypot(*d))
            normal = np.array([d[1], -d[0]]) / length
            if amap.det < 0:
                normal = -normal
            phys = amap.to_physical(ref)
            gb = np.asarray(g(phys[:, 0], phys[:, 1]), dtype=float)
            dn = basis.eval_ref_grad(ref) @ inv @ normal
            load += length * np.einsum("q,q,qn->n", seg.weights, gb, dn)

    S = stiffness_matrix(basis, amap)
    mean_row = det * np.einsum("q,qn->n", rule.weights, phi)
    n = basis.dim
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = S
    A[:n, n] = mean_row
    A[n, :n] = mean_row
    rhs = np.append(load, det * float(np.dot(rule.weights, gv)))
    sol = np.linalg.solve(A, rhs)
    return sol[:n]
