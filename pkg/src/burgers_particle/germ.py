"""Geometry of the admissible interface-trace set (the "germ").

A fluid/particle interface moving at speed ``v`` with friction ``lam`` admits
one-sided trace pairs ``(u_minus, u_plus)`` from three pieces:

* ``G1``   -- the line ``u_minus == u_plus + lam`` (friction shock),
* ``G2``   -- the subsonic box ``[v, v+lam] x [v-lam, v]`` below the line,
* ``G3``   -- the supersonic band ``|u_minus + u_plus - 2 v| <= lam`` with
  ``u_minus - u_plus > lam``.

``G1 | G2`` is a maximal part of the set: a pair belongs to the germ if and
only if the entropy pairing ``xi`` against every point of ``G1 | G2`` is
nonnegative.  This module provides the classification, the Kruzhkov entropy
flux and pairing, and the L1 distance/projection onto ``G1 | G2``.
"""

from __future__ import annotations

import math
from enum import Enum

# Absolute tolerance for boundary classification.  The pieces share
# measure-zero boundaries; membership there never affects flux values.
TAU_GEOM = 1e-12


class GermRegion(Enum):
    G1 = "G1"
    G2 = "G2"
    G3 = "G3"
    OUTSIDE = "outside"


def kruzhkov_flux(a: float, b: float, v: float) -> float:
    """Kruzhkov entropy flux of f_v(u) = u^2/2 - v*u between states a and b.

    Evaluates sign(a-b) * (f_v(a) - f_v(b)) with sign(0) = 0, so the flux
    vanishes exactly when a == b and is symmetric under swapping a and b.
    """
    s = math.copysign(1.0, a - b) if a != b else 0.0
    return s * ((0.5 * a * a - v * a) - (0.5 * b * b - v * b))


def xi(p: tuple[float, float], q: tuple[float, float], v: float) -> float:
    """Entropy pairing of two trace pairs across the interface.

    Returns Phi_v(p_minus, q_minus) - Phi_v(p_plus, q_plus).  Nonnegative
    whenever both pairs belong to the germ at speed v.
    """
    return kruzhkov_flux(p[0], q[0], v) - kruzhkov_flux(p[1], q[1], v)


def classify(
    p: tuple[float, float], v: float, lam: float, tol: float = TAU_GEOM
) -> GermRegion:
    """Classify a trace pair into G1, G2, G3 or OUTSIDE at speed v.

    The pieces are tested in order G1, G2, G3 with absolute tolerance ``tol``
    on the boundary inequalities, so points on the shared line boundary
    resolve to G1.
    """
    if lam <= 0.0:
        raise ValueError(f"friction must be positive, got lam={lam}")
    um, up = p
    d = um - up
    if abs(d - lam) <= tol:
        return GermRegion.G1
    if (
        um >= v - tol
        and um <= v + lam + tol
        and up >= v - lam - tol
        and up <= v + tol
        and d < lam
    ):
        return GermRegion.G2
    if abs(um + up - 2.0 * v) <= lam + tol and d > lam:
        return GermRegion.G3
    return GermRegion.OUTSIDE


def in_germ(p: tuple[float, float], v: float, lam: float, tol: float = TAU_GEOM) -> bool:
    """Membership in the full germ with all boundaries inflated by ``tol``."""
    return classify(p, v, lam, tol) is not GermRegion.OUTSIDE


def _box_clamp(p: tuple[float, float], v: float, lam: float) -> tuple[float, float]:
    qa = min(max(float(p[0]), v), v + lam)
    qb = min(max(float(p[1]), v - lam), v)
    return qa, qb


def dist1_to_H(p: tuple[float, float], v: float, lam: float) -> float:
    """L1 distance of a trace pair to the closure of G1 | G2 at speed v.

    The distance to the line reduces to |u_minus - u_plus - lam|.  The
    distance to the closed G2 piece is the coordinate-wise clamp onto the box
    when the clamped point satisfies u_minus - u_plus <= lam; otherwise the
    nearest G2 points sit on the line itself and the line term dominates.
    """
    if lam <= 0.0:
        raise ValueError(f"friction must be positive, got lam={lam}")
    d_line = abs(float(p[0]) - float(p[1]) - lam)
    qa, qb = _box_clamp(p, v, lam)
    if qa - qb <= lam:
        d_box = abs(p[0] - qa) + abs(p[1] - qb)
        return min(d_line, float(d_box))
    return d_line


def project_to_H(
    p: tuple[float, float], v: float, lam: float
) -> tuple[float, float]:
    """An L1 projection of a trace pair onto the closure of G1 | G2.

    Ties between the line and the box are resolved toward the box so the
    result is deterministic.  On the line the minimizing segment is collapsed
    to its midpoint.
    """
    if lam <= 0.0:
        raise ValueError(f"friction must be positive, got lam={lam}")
    d_line = abs(float(p[0]) - float(p[1]) - lam)
    qa, qb = _box_clamp(p, v, lam)
    if qa - qb <= lam:
        d_box = abs(p[0] - qa) + abs(p[1] - qb)
        if d_box <= d_line:
            return qa, qb
    t = 0.5 * (float(p[0]) + float(p[1]) + lam)
    return t, t - lam
