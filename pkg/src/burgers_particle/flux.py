"""Numerical fluxes for the moving-frame Burgers flux f_v(u) = u^2/2 - v*u.

Three monotone two-point bulk fluxes (Godunov, Rusanov, Engquist-Osher) and
the two interface-flux families used around the particle:

* ``MAX_GERM`` substitutes the neighbor state through the subsonic box, so
  the pair reproduces the one-sided exact fluxes on all of G1 | G2,
* ``G1_ONLY`` shifts one argument by the friction parameter and reproduces
  the exact fluxes on the line G1 only.

Everything accepts scalars or numpy arrays (broadcasting).
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class BulkFluxKind(Enum):
    GODUNOV = "godunov"
    RUSANOV = "rusanov"
    ENGQUIST_OSHER = "eo"


class InterfaceFluxKind(Enum):
    MAX_GERM = "max-germ"
    G1_ONLY = "g1-only"


def f_v(u, v):
    """Moving-frame Burgers flux u^2/2 - v*u, written about the sonic point."""
    d = u - v
    return 0.5 * d * d - 0.5 * v * v


def _godunov(a, b, v):
    # Exact Riemann flux of the convex f_v: interval minimum for rarefactions
    # (a <= b, attained at the sonic point when it is inside), endpoint
    # maximum for shocks (a > b).
    sonic = np.clip(v, np.minimum(a, b), np.maximum(a, b))
    rare = f_v(sonic, v)
    shock = np.maximum(f_v(a, v), f_v(b, v))
    return np.where(a <= b, rare, shock)


def _rusanov(a, b, v):
    s = np.maximum(np.abs(a - v), np.abs(b - v))
    return 0.5 * (f_v(a, v) + f_v(b, v)) - 0.5 * s * (b - a)


def _engquist_osher(a, b, v):
    up = np.maximum(a - v, 0.0)
    dn = np.minimum(b - v, 0.0)
    return f_v(v, v) + 0.5 * up * up + 0.5 * dn * dn


_BULK = {
    BulkFluxKind.GODUNOV: _godunov,
    BulkFluxKind.RUSANOV: _rusanov,
    BulkFluxKind.ENGQUIST_OSHER: _engquist_osher,
}


def bulk_flux(kind: BulkFluxKind, a, b, v):
    """Two-point numerical flux between states a (left) and b (right)."""
    return _BULK[kind](a, b, v)


def interface_fluxes(kind: InterfaceFluxKind, bulk: BulkFluxKind, a, b, v, lam: float):
    """Left/right fluxes (g_minus, g_plus) at the particle interface.

    ``a`` is the state in the cell left of the particle, ``b`` on the right.
    """
    g = _BULK[bulk]
    if kind is InterfaceFluxKind.G1_ONLY:
        return g(a, b + lam, v), g(a - lam, b, v)
    g_minus = g(a, np.minimum(b + lam, np.maximum(a, v)), v)
    g_plus = g(np.maximum(a - lam, np.minimum(b, v)), b, v)
    return g_minus, g_plus


def lipschitz_bound(
    bulk: BulkFluxKind,
    iface: InterfaceFluxKind,
    m: float,
    M: float,
    v_lo: float,
    v_hi: float,
    lam: float,
) -> float:
    """Bound on the state-slopes of all active fluxes over the invariant box.

    States are taken in ``[m - lam, M + lam]`` (the widening covers the
    shifted arguments of the interface fluxes) and speeds in ``[v_lo, v_hi]``.
    Godunov and Engquist-Osher slopes are bounded by the largest wave speed
    over that set.  The local-speed Rusanov flux has slopes up to twice the
    wave speed (the variable stabilization term contributes |a - b|/2 on top
    of the wave speed), so its bound carries a factor two.
    """
    if not (np.isfinite(m) and np.isfinite(M) and np.isfinite(v_lo) and np.isfinite(v_hi)):
        raise ValueError("state and speed bounds must be finite")
    if m > M:
        raise ValueError(f"need m <= M, got m={m}, M={M}")
    if v_lo > v_hi:
        raise ValueError(f"need v_lo <= v_hi, got v_lo={v_lo}, v_hi={v_hi}")
    wave = max(abs(m - lam - v_hi), abs(M + lam - v_lo))
    if bulk is BulkFluxKind.RUSANOV:
        return 2.0 * wave
    return wave
