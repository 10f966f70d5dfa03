import math

import numpy as np
import pytest

from burgers_particle.diagnostics import dissipativity_probe
from burgers_particle.flux import (
    BulkFluxKind,
    InterfaceFluxKind,
    bulk_flux,
    f_v,
    interface_fluxes,
    lipschitz_bound,
)

BULKS = list(BulkFluxKind)
IFACES = list(InterfaceFluxKind)


def godunov_oracle(a, b, v, n=10_001):
    """Exact Riemann flux by dense enumeration of f_v over [a, b]."""
    u = np.linspace(min(a, b), max(a, b), n)
    f = 0.5 * u * u - v * u
    return float(f.min()) if a <= b else float(max(f[0], f[-1]))


def eo_oracle(a, b, v, n=200_001):
    """Engquist-Osher flux by quadrature of |f_v'| between the states."""
    fa = 0.5 * a * a - v * a
    fb = 0.5 * b * b - v * b
    u = np.linspace(a, b, n)
    integral = float(np.trapezoid(np.abs(u - v), u))
    return 0.5 * (fa + fb) - 0.5 * integral


def test_consistency_is_exact(rng):
    a = rng.uniform(-3, 3, size=500)
    v = rng.uniform(-2, 2, size=500)
    for kind in BULKS:
        assert np.array_equal(bulk_flux(kind, a, a, v), f_v(a, v))
        np.testing.assert_allclose(
            bulk_flux(kind, a, a, v), 0.5 * a * a - v * a, rtol=0, atol=1e-14
        )


def test_godunov_examples():
    god = BulkFluxKind.GODUNOV
    assert bulk_flux(god, 1, 1, 0) == 0.5
    assert bulk_flux(god, 2, 2, 1) == 0.0
    assert bulk_flux(god, -1, 1, 0) == 0.0  # sonic rarefaction
    assert bulk_flux(god, 1, -1, 0) == 0.5  # standing shock


def test_rusanov_and_eo_examples():
    assert bulk_flux(BulkFluxKind.RUSANOV, 1, -1, 0) == 1.5
    assert bulk_flux(BulkFluxKind.ENGQUIST_OSHER, 1, -1, 0) == 1.0


def test_godunov_matches_enumeration_oracle(rng):
    # 1e4 grid points resolve the quadratic minimum to ~(gap/n)^2/8, so keep
    # the state gap within 2.
    for _ in range(200):
        a, v = rng.uniform(-3, 3, size=2)
        b = a + rng.uniform(-2, 2)
        got = float(bulk_flux(BulkFluxKind.GODUNOV, a, b, v))
        assert got == pytest.approx(godunov_oracle(a, b, v), abs=1e-8)


def test_eo_matches_quadrature_oracle(rng):
    for _ in range(40):
        a, b, v = rng.uniform(-3, 3, size=3)
        got = float(bulk_flux(BulkFluxKind.ENGQUIST_OSHER, a, b, v))
        assert got == pytest.approx(eo_oracle(a, b, v), abs=1e-8)


@pytest.mark.parametrize("kind", BULKS)
def test_bulk_monotonicity(kind, rng):
    # nondecreasing in the left state, nonincreasing in the right
    a = rng.uniform(-3, 3, size=2000)
    b = rng.uniform(-3, 3, size=2000)
    v = rng.uniform(-2, 2, size=2000)
    eps = 1e-6
    d1 = bulk_flux(kind, a + eps, b, v) - bulk_flux(kind, a, b, v)
    d2 = bulk_flux(kind, a, b + eps, v) - bulk_flux(kind, a, b, v)
    assert float(d1.min()) >= -1e-10
    assert float(d2.max()) <= 1e-10


@pytest.mark.parametrize("iface", IFACES)
@pytest.mark.parametrize("kind", BULKS)
def test_interface_monotonicity(iface, kind, rng):
    a = rng.uniform(-3, 3, size=1000)
    b = rng.uniform(-3, 3, size=1000)
    v = rng.uniform(-2, 2, size=1000)
    eps = 1e-6
    for pick in (0, 1):
        base = interface_fluxes(iface, kind, a, b, v, 1.0)[pick]
        up1 = interface_fluxes(iface, kind, a + eps, b, v, 1.0)[pick]
        up2 = interface_fluxes(iface, kind, a, b + eps, v, 1.0)[pick]
        assert float((up1 - base).min()) >= -1e-10
        assert float((up2 - base).max()) <= 1e-10


def test_interface_flux_examples():
    god = BulkFluxKind.GODUNOV
    mg, g1 = InterfaceFluxKind.MAX_GERM, InterfaceFluxKind.G1_ONLY
    assert interface_fluxes(mg, god, 1.0, 0.0, 0.0, 1.0) == (0.5, 0.0)
    gm, gp = interface_fluxes(mg, god, 0.5, -0.5, 0.0, 1.0)
    assert (gm, gp) == (0.125, 0.125)
    assert interface_fluxes(g1, god, 2.0, 0.0, 0.0, 1.0) == (2.0, 0.5)


@pytest.mark.parametrize("iface", IFACES)
@pytest.mark.parametrize("kind", BULKS)
def test_line_well_balance(iface, kind, rng):
    # On the line u_minus = u_plus + lam both fluxes reduce to the one-sided
    # exact fluxes, to within 4 ulps.
    for _ in range(300):
        b = float(rng.uniform(-3, 3))
        v = float(rng.uniform(-2, 2))
        lam = float(rng.choice([0.5, 1.0, 2.0]))
        a = b + lam
        gm, gp = interface_fluxes(iface, kind, a, b, v, lam)
        for got, ref in ((gm, f_v(a, v)), (gp, f_v(b, v))):
            assert abs(float(got) - ref) <= 4 * np.spacing(abs(ref) + 1e-300)


@pytest.mark.parametrize("kind", BULKS)
def test_box_well_balance_max_germ(kind, rng):
    # The substituting family reproduces exact one-sided fluxes on the whole
    # subsonic box as well.
    mg = InterfaceFluxKind.MAX_GERM
    for _ in range(300):
        v = float(rng.uniform(-2, 2))
        lam = float(rng.choice([0.5, 1.0, 2.0]))
        while True:
            a = float(rng.uniform(v, v + lam))
            b = float(rng.uniform(v - lam, v))
            if a - b < lam:
                break
        gm, gp = interface_fluxes(mg, kind, a, b, v, lam)
        for got, ref in ((gm, f_v(a, v)), (gp, f_v(b, v))):
            assert abs(float(got) - ref) <= 4 * np.spacing(abs(ref) + 1e-300)


@pytest.mark.parametrize("iface", IFACES)
@pytest.mark.parametrize("kind", BULKS)
def test_tip_condition(iface, kind, rng):
    for _ in range(200):
        v = float(rng.uniform(-2, 2))
        lam = float(rng.choice([0.5, 1.0, 2.0]))
        gm, gp = interface_fluxes(iface, kind, v, v, v, lam)
        assert abs(float(gm) - float(gp)) <= 4 * np.spacing(abs(float(gm)) + 1e-300)


@pytest.mark.parametrize("kind", BULKS)
def test_reflection_symmetry(kind, rng):
    # g(v - A, v - B, v) == g(v + B, v + A, v)
    for _ in range(300):
        A, B, v = rng.uniform(-3, 3, size=3)
        lhs = float(bulk_flux(kind, v - A, v - B, v))
        rhs = float(bulk_flux(kind, v + B, v + A, v))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_lipschitz_examples():
    god, mg = BulkFluxKind.GODUNOV, InterfaceFluxKind.MAX_GERM
    assert lipschitz_bound(god, mg, -1, 1, -1, 1, 1) == 3.0
    assert lipschitz_bound(god, mg, 0, 0, 0, 0, 1) == 1.0
    small = lipschitz_bound(god, mg, 0.3, 0.3, -0.2, -0.2, 1e-3)
    assert small >= abs(0.3 - (-0.2)) + 1e-3 - 1e-15


def test_lipschitz_rejects_bad_bounds():
    god, mg = BulkFluxKind.GODUNOV, InterfaceFluxKind.MAX_GERM
    with pytest.raises(ValueError):
        lipschitz_bound(god, mg, 1, -1, 0, 0, 1)
    with pytest.raises(ValueError):
        lipschitz_bound(god, mg, 0, 0, 1, -1, 1)
    with pytest.raises(ValueError):
        lipschitz_bound(god, mg, 0, math.nan, 0, 0, 1)


@pytest.mark.parametrize("iface", IFACES)
@pytest.mark.parametrize("kind", BULKS)
def test_lipschitz_dominates_sampled_slopes(iface, kind, rng):
    m, M, v_lo, v_hi, lam = -1.0, 1.0, -1.0, 1.0, 1.0
    L = lipschitz_bound(kind, iface, m, M, v_lo, v_hi, lam)
    a = rng.uniform(m - lam, M + lam, size=3000)
    b = rng.uniform(m - lam, M + lam, size=3000)
    v = rng.uniform(v_lo, v_hi, size=3000)
    eps = 1e-7
    d1 = (bulk_flux(kind, a + eps, b, v) - bulk_flux(kind, a, b, v)) / eps
    d2 = (bulk_flux(kind, a, b + eps, v) - bulk_flux(kind, a, b, v)) / eps
    assert float(np.abs(d1).max()) <= L + 1e-5
    assert float(np.abs(d2).max()) <= L + 1e-5
    # interface fluxes stay within the same bound (their arguments shift by
    # at most lam, covered by the widened box)
    am = rng.uniform(m, M, size=3000)
    bm = rng.uniform(m, M, size=3000)
    for pick in (0, 1):
        base = interface_fluxes(iface, kind, am, bm, v, lam)[pick]
        s1 = (interface_fluxes(iface, kind, am + eps, bm, v, lam)[pick] - base) / eps
        s2 = (interface_fluxes(iface, kind, am, bm + eps, v, lam)[pick] - base) / eps
        assert float(np.abs(s1).max()) <= L + 1e-5
        assert float(np.abs(s2).max()) <= L + 1e-5


def test_rusanov_slopes_exceed_wave_speed(rng):
    # The local-speed stabilization contributes |a - b|/2 on top of the wave
    # speed, so the plain wave bound would undershoot; the returned bound
    # carries the factor two.
    god = lipschitz_bound(BulkFluxKind.GODUNOV, InterfaceFluxKind.MAX_GERM, -1, 1, -1, 1, 1)
    rus = lipschitz_bound(BulkFluxKind.RUSANOV, InterfaceFluxKind.MAX_GERM, -1, 1, -1, 1, 1)
    assert rus == 2 * god
    a, b, v = 2.0, -2.0, -1.0
    eps = 1e-7
    slope = (bulk_flux(BulkFluxKind.RUSANOV, a + eps, b, v) - bulk_flux(BulkFluxKind.RUSANOV, a, b, v)) / eps
    assert slope > god + 1.0


@pytest.mark.parametrize(
    "kind,iface",
    [
        (BulkFluxKind.GODUNOV, InterfaceFluxKind.MAX_GERM),
        (BulkFluxKind.GODUNOV, InterfaceFluxKind.G1_ONLY),
        (BulkFluxKind.ENGQUIST_OSHER, InterfaceFluxKind.MAX_GERM),
        (BulkFluxKind.ENGQUIST_OSHER, InterfaceFluxKind.G1_ONLY),
    ],
)
def test_dissipativity_godunov_eo(kind, iface):
    for v in (-1.0, 0.0, 1.0):
        d1, d2 = dissipativity_probe(iface, kind, 1.0, (-2.0, 2.0), v, 200)
        assert min(d1, d2) >= -1e-10


@pytest.mark.parametrize("iface", IFACES)
def test_dissipativity_probe_detects_rusanov_violation(iface):
    # The local-speed Rusanov stabilization makes g_minus - g_plus decrease
    # in spots (e.g. lam=1, v=-1, u_plus=1.5, u_minus near 0); the probe has
    # to report it.
    worst = 0.0
    for v in (-1.0, 0.0, 1.0):
        d1, d2 = dissipativity_probe(iface, BulkFluxKind.RUSANOV, 1.0, (-2.0, 2.0), v, 200)
        worst = min(worst, d1, d2)
    assert worst < -1e-6
