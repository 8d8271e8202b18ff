"""Truncated Puiseux-series roots of polynomials over Novikov scalars.

Works over coefficients that are truncated lattice Novikov scalars with
complex float coefficients.  Root valuations come from the Newton polygon,
leading coefficients from the numeric roots of each edge polynomial, and
simple branches are then sharpened by Newton iteration in the scalar field.
Clusters that cannot be separated below the truncation order are reported as
a precision failure (callers treat this as non-semisimple or ill-conditioned
input).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .novikov import ExponentLattice, NovikovScalar

#: Relative tolerance for clustering numeric roots of edge polynomials.
CLUSTER_TOL = 1e-7

#: Coefficients below this magnitude are treated as absent in hull building.
HULL_ZERO_TOL = 1e-11

_MAX_DEPTH = 32


class PuiseuxPrecisionError(ArithmeticError):
    """Roots could not be separated at the configured truncation order."""


def poly_eval(coeffs: Sequence[NovikovScalar], x: NovikovScalar) -> NovikovScalar:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def poly_derivative(coeffs: Sequence[NovikovScalar]) -> List[NovikovScalar]:
    return [c.scale(i) for i, c in enumerate(coeffs) if i >= 1]


def poly_embed(coeffs: Sequence[NovikovScalar], lattice: ExponentLattice):
    """Re-declare coefficients on a finer lattice (terms unchanged)."""
    return [NovikovScalar(lattice, c.terms, c.truncation) for c in coeffs]


def _lower_hull(points):
    """Lower convex hull of (i, valuation) points with increasing i."""
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _cluster(values, tol):
    """Group numerically equal complex values; returns (center, count) pairs.

    Cluster centroids of an m-fold root are eps-accurate even though the
    individual numeric roots scatter by roughly eps^(1/m).
    """
    remaining = list(values)
    clusters = []
    while remaining:
        v = remaining.pop()
        members = [v]
        keep = []
        for w in remaining:
            if abs(w - v) <= tol * (1.0 + abs(v)):
                members.append(w)
            else:
                keep.append(w)
        remaining = keep
        clusters.append((sum(members) / len(members), len(members)))
    return clusters


def _cluster_tol(degree: int) -> float:
    # numeric roots of an m-fold zero scatter by ~eps^(1/m)
    return max(CLUSTER_TOL, 20.0 * (2.2e-16) ** (1.0 / max(degree, 1)))


def _shift_poly(coeffs: List[NovikovScalar], x0: NovikovScalar) -> List[NovikovScalar]:
    # p(x0 + y) expanded in y, by iterated synthetic division by (x - x0)
    work = list(coeffs)
    out = []
    while work:
        rem = work[-1]
        quot = [work[-1]]
        for c in reversed(work[:-1]):
            rem = c + rem * x0
            quot.append(rem)
        quot.reverse()
        out.append(quot[0])
        work = quot[1:]
    return out


def _newton_refine(
    coeffs: List[NovikovScalar], x0: NovikovScalar, order: Fraction
) -> NovikovScalar:
    dcoeffs = poly_derivative(coeffs)
    x = x0
    for _ in range(64):
        fx = poly_eval(coeffs, x)
        if fx.is_zero(0.0):
            break
        dfx = poly_eval(dcoeffs, x)
        if dfx.is_zero():
            raise PuiseuxPrecisionError("derivative vanished during refinement")
        delta = fx * dfx.inverse()
        if delta.is_zero(0.0):
            break
        x = x - delta
        if delta.valuation() >= order:
            break
    scale = max(c.norm_inf() for c in coeffs)
    residual = poly_eval(coeffs, x).norm_inf()
    if residual > 1e-6 * (1.0 + scale) * (1.0 + x.norm_inf()) ** (len(coeffs) - 1):
        raise PuiseuxPrecisionError(
            f"refined branch has residual {residual:.2e}; ill-conditioned input"
        )
    return x


def puiseux_roots(coeffs: Sequence[NovikovScalar], order) -> List[NovikovScalar]:
    """All roots (with multiplicity) of a polynomial over Novikov scalars.

    The leading coefficient must be nonzero.  Roots are returned as truncated
    scalars, each declared on the (possibly refined) lattice its branch
    needs.  Raises PuiseuxPrecisionError when two roots coincide to the
    requested expansion order.
    """
    coeffs = list(coeffs)
    if len(coeffs) < 2:
        return []
    if coeffs[-1].is_zero():
        raise ValueError("leading coefficient must be nonzero")
    return _roots(coeffs, Fraction(order), 0, None)


def _roots(
    coeffs: List[NovikovScalar],
    order: Fraction,
    depth: int,
    floor: Optional[Fraction],
) -> List[NovikovScalar]:
    """Roots of ``coeffs``; with a ``floor``, only branches of valuation > floor.

    ``floor`` is set in recursive calls on cluster-shifted polynomials: the
    deeper corrections must have strictly larger valuation, and an exactly
    vanishing constant coefficient there means a repeated root at this
    truncation.
    """
    if depth > _MAX_DEPTH:
        raise PuiseuxPrecisionError("branch recursion exceeded depth bound")
    lattice = coeffs[0].lattice
    n = len(coeffs) - 1
    if n == 0:
        return []
    roots: List[NovikovScalar] = []

    v = 0
    while v < n and coeffs[v].is_zero(HULL_ZERO_TOL):
        v += 1
    if v > 0:
        if floor is not None:
            raise PuiseuxPrecisionError(
                "repeated root at the configured truncation (non-semisimple input)"
            )
        roots.extend(NovikovScalar.zero(lattice, order) for _ in range(v))
        coeffs = coeffs[v:]
        n = len(coeffs) - 1
        if n == 0:
            return roots

    points = [
        (i, c.valuation()) for i, c in enumerate(coeffs) if not c.is_zero(HULL_ZERO_TOL)
    ]
    hull = _lower_hull(points)

    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        mu = (v1 - v2) / Fraction(i2 - i1)  # valuation of roots on this edge
        if floor is not None and mu <= floor:
            continue  # belongs to sibling clusters of the parent polynomial
        if mu >= order:
            raise PuiseuxPrecisionError(
                "branches merge below the truncation order (non-semisimple input)"
            )
        # edge polynomial for the leading coefficients of this edge's roots
        poly = np.zeros(i2 - i1 + 1, dtype=complex)
        for i, val in points:
            if i1 <= i <= i2 and val == v1 + (i - i1) * (v2 - v1) / Fraction(i2 - i1):
                poly[i - i1] = coeffs[i].leading()[1]
        edge_roots = np.roots(poly[::-1])
        tol = _cluster_tol(i2 - i1)
        edge_roots = edge_roots[np.abs(edge_roots) > tol]
        clusters = _cluster(edge_roots, tol)
        if sum(m for _, m in clusters) != i2 - i1:
            raise PuiseuxPrecisionError("edge polynomial roots are ill-conditioned")

        factor = mu.denominator // math.gcd(mu.denominator, lattice.denominator_bound)
        branch_lattice = lattice.refine(factor) if factor > 1 else lattice
        ecoeffs = poly_embed(coeffs, branch_lattice) if factor > 1 else coeffs
        for c0, mult in clusters:
            x0 = NovikovScalar.monomial(branch_lattice, c0, mu, order)
            if mult == 1:
                roots.append(_newton_refine(ecoeffs, x0, order))
            else:
                shifted = _shift_poly(ecoeffs, x0)
                sub = _roots(shifted, order, depth + 1, mu)
                if len(sub) != mult:
                    raise PuiseuxPrecisionError(
                        "cluster did not separate into the expected branch count"
                    )
                for s in sub:
                    common = x0.lattice.join(s.lattice)
                    roots.append(x0.on_lattice(common) + s.on_lattice(common))
    return roots
