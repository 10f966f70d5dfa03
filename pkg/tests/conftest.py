"""Shared oracles and generators for the test suite.

The oracles here are deliberately independent of the library internals:
brute-force minimization over dense samples, quadrature, and direct
enumeration.  Expected values in the tests were computed with these.
"""

import numpy as np
import pytest

def sample_h_closure(v, lam, n_line=2001, n_box=201):
    """Dense sample of the closure of the line + subsonic-box set (oracle)."""
    t = np.linspace(v - 6.0 * lam, v + 6.0 * lam, n_line)
    line = np.column_stack([t, t - lam])
    um = np.linspace(v, v + lam, n_box)
    up = np.linspace(v - lam, v, n_box)
    A, B = np.meshgrid(um, up, indexing="ij")
    keep = (A - B) <= lam
    box = np.column_stack([A[keep], B[keep]])
    return np.vstack([line, box])


def brute_force_dist(p, v, lam, sample=None):
    """L1 distance to the admissible line/box set by dense enumeration."""
    pts = sample_h_closure(v, lam) if sample is None else sample
    return float(np.min(np.abs(pts[:, 0] - p[0]) + np.abs(pts[:, 1] - p[1])))


def random_germ_point(rng, v, lam):
    """A random member of the germ, uniform over its three pieces."""
    piece = rng.integers(0, 3)
    if piece == 0:  # line
        t = float(rng.uniform(v - 3 * lam, v + 3 * lam))
        return (t, t - lam)
    if piece == 1:  # subsonic box, strictly below the line
        while True:
            a = float(rng.uniform(v, v + lam))
            b = float(rng.uniform(v - lam, v))
            if a - b < lam:
                return (a, b)
    # supersonic band
    s = float(rng.uniform(-lam, lam))  # u_minus + u_plus - 2v
    d = float(rng.uniform(lam * (1 + 1e-9), 4 * lam))  # u_minus - u_plus
    return (v + 0.5 * (s + d), v + 0.5 * (s - d))


def random_piecewise(rng, n_max=8, value_range=(-2.0, 2.0), span=1.0):
    from burgers_particle.scheme import PiecewiseConstant

    n = int(rng.integers(1, n_max + 1))
    vals = tuple(float(x) for x in rng.uniform(*value_range, size=n))
    bps = tuple(float(x) for x in np.sort(rng.uniform(-span, span, size=n - 1)))
    return PiecewiseConstant(breakpoints=bps, values=vals)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
