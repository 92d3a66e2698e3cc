"""Quadrature rules on the reference triangle and reference edge.

All interior assembly uses the 7-point degree-5 rule: it integrates every
bilinear/trilinear form of the P2/P1 discretization exactly (the worst
integrand, quadratic velocity times quadratic test times linear gradient,
has total degree 5).  The 16-point degree-8 rule exists only as an
independent cross-check in the tests.

Points are stored in reference coordinates (x, y) on the triangle with
vertices (0,0), (1,0), (0,1); weights sum to 1 and are understood against
the *area* of the physical element, i.e. ``integral = area * sum(w_q f_q)``.
"""

import numpy as np

_SQRT15 = np.sqrt(15.0)


def _orbit1():
    return [(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)]


def _orbit3(a):
    b = 1.0 - 2.0 * a
    return [(a, a, b), (a, b, a), (b, a, a)]


def _orbit6(a, b):
    c = 1.0 - a - b
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def _finalize(bary_groups):
    bary = []
    weights = []
    for w, pts in bary_groups:
        for p in pts:
            bary.append(p)
            weights.append(w)
    bary = np.asarray(bary, dtype=float)
    weights = np.asarray(weights, dtype=float)
    # reference coordinates: x = L1, y = L2 with L0 = 1 - x - y
    points = bary[:, 1:3].copy()
    return points, weights, bary


# Degree-5, 7 points (Hammer-Marlowe-Stroud).
_A5 = (6.0 + _SQRT15) / 21.0
_B5 = (6.0 - _SQRT15) / 21.0
TRI_DEGREE5 = _finalize([
    (9.0 / 40.0, _orbit1()),
    ((155.0 + _SQRT15) / 1200.0, _orbit3(_A5)),
    ((155.0 - _SQRT15) / 1200.0, _orbit3(_B5)),
])

def _duffy_rule(n):
    """Collapsed n*n Gauss rule on the triangle, exact to degree 2n - 2.

    Built from machine-precision Gauss-Legendre nodes, so it serves as an
    independent high-degree oracle without tabulated constants.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    px = U.ravel()
    py = (V * (1.0 - U)).ravel()
    weights = (2.0 * WU * WV * (1.0 - U)).ravel()
    points = np.column_stack([px, py])
    bary = np.column_stack([1.0 - px - py, px, py])
    return points, weights, bary


# Degree-8 oracle rule (25 collapsed Gauss points).
TRI_DEGREE8 = _duffy_rule(5)

# 3-point Gauss-Legendre on [0, 1] (degree 5), for boundary line integrals.
_G3 = np.sqrt(3.0 / 5.0)
EDGE_GAUSS3_POINTS = np.array([0.5 * (1.0 - _G3), 0.5, 0.5 * (1.0 + _G3)])
EDGE_GAUSS3_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


def triangle_rule(degree=5):
    """Return (points (nq,2), weights (nq,)) for the requested degree."""
    if degree <= 5:
        return TRI_DEGREE5[0], TRI_DEGREE5[1]
    return TRI_DEGREE8[0], TRI_DEGREE8[1]
