"""Particle-tracking finite volume scheme for Burgers flow with a point
particle coupled through drag.

The uniform mesh translates with the particle so the particle always sits at
the interface between cells 0 and 1.  One explicit step updates the fluid by
flux differences evaluated at the current particle speed (with a dedicated
flux pair around the particle), updates the particle velocity by conservation
of total momentum, and shifts the mesh.  An implicit variant evaluates all
fluxes at the new particle velocity, removing the mass restriction on the
time step for light particles.

Two domain realizations are provided: a padded window emulating the infinite
lattice (wide enough that no disturbance reaches the boundary before the
final time, with a runtime guard) and a periodic box.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .diagnostics import (
    BoundsEnvelope,
    DiagnosticsRecord,
    bounds_envelope,
    make_record,
)
from .flux import BulkFluxKind, InterfaceFluxKind, bulk_flux, interface_fluxes, lipschitz_bound


class Domain(Enum):
    PADDED = "padded"
    PERIODIC = "periodic"


class VelocityUpdate(Enum):
    EXPLICIT = "explicit"
    IMPLICIT = "implicit"


class BoundaryGuardError(RuntimeError):
    """A disturbance reached the padded boundary before the final time."""


@dataclass(frozen=True)
class PiecewiseConstant:
    """Piecewise-constant function: values[i] on (breakpoints[i-1], breakpoints[i])."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bps = tuple(float(x) for x in self.breakpoints)
        vals = tuple(float(x) for x in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(vals) != len(bps) + 1:
            raise ValueError("need len(values) == len(breakpoints) + 1")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not all(map(math.isfinite, bps + vals)):
            raise ValueError("breakpoints and values must be finite")

    @classmethod
    def riemann(cls, left: float, right: float, x_jump: float = 0.0) -> "PiecewiseConstant":
        return cls(breakpoints=(x_jump,), values=(left, right))

    def __call__(self, x):
        idx = np.searchsorted(self.breakpoints, np.asarray(x, dtype=float), side="right")
        return np.asarray(self.values)[idx]

    def antiderivative(self, x):
        """Exact integral from the first breakpoint (or 0 for a constant)."""
        x = np.asarray(x, dtype=float)
        bps = np.asarray(self.breakpoints)
        vals = np.asarray(self.values)
        if bps.size == 0:
            return vals[0] * x
        seg = vals[1:-1] * np.diff(bps)
        cum = np.concatenate([[0.0], np.cumsum(seg)])  # value at each breakpoint
        idx = np.searchsorted(bps, x, side="right")
        anchor = np.where(idx == 0, bps[0], bps[np.maximum(idx - 1, 0)])
        base = np.where(idx == 0, 0.0, cum[np.maximum(idx - 1, 0)])
        return base + vals[idx] * (x - anchor)

    def cell_averages(self, edges: np.ndarray) -> np.ndarray:
        """Exact averages over the cells [edges[i], edges[i+1]).

        Cells without an interior breakpoint take the piece value directly
        (bit-exact constant regions); straddling cells get the exact integral.
        """
        bps = np.asarray(self.breakpoints)
        vals = np.asarray(self.values)
        left, right = edges[:-1], edges[1:]
        idx = np.searchsorted(bps, left, side="right")
        out = vals[idx].astype(float)
        if bps.size:
            split = np.searchsorted(bps, right, side="left") > idx
            F = self.antiderivative
            for i in np.nonzero(split)[0]:
                out[i] = (F(right[i]) - F(left[i])) / (right[i] - left[i])
        return out

    def side_bounds(self, x0: float) -> tuple[float, float, float, float]:
        """(inf, sup) of the values on each side of x0: (inf_l, sup_l, inf_r, sup_r)."""
        bps, vals = self.breakpoints, self.values
        k = len(bps)
        left = [vals[i] for i in range(k + 1) if i == 0 or bps[i - 1] < x0]
        right = [vals[i] for i in range(k + 1) if i == k or bps[i] > x0]
        return min(left), max(left), min(right), max(right)


@dataclass(frozen=True)
class ParticleState:
    h: float
    v: float
    m_p: float

    def __post_init__(self):
        if self.m_p <= 0.0:
            raise ValueError(f"particle mass must be positive, got {self.m_p}")
        if not (math.isfinite(self.h) and math.isfinite(self.v)):
            raise ValueError("particle position and velocity must be finite")


@dataclass(frozen=True)
class SchemeConfig:
    lam: float
    mu: float
    T: float
    m_p: float
    bulk: BulkFluxKind = BulkFluxKind.GODUNOV
    iface: InterfaceFluxKind = InterfaceFluxKind.MAX_GERM
    velocity_update: VelocityUpdate = VelocityUpdate.EXPLICIT
    domain: Domain = Domain.PADDED
    dt_override: float | None = None
    half_width: float | None = None

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError(f"friction must be positive, got lam={self.lam}")
        if self.mu <= 0.0:
            raise ValueError(f"mesh ratio must be positive, got mu={self.mu}")
        if self.T < 0.0:
            raise ValueError(f"final time must be nonnegative, got T={self.T}")
        if self.m_p <= 0.0:
            raise ValueError(f"particle mass must be positive, got m_p={self.m_p}")
        if self.dt_override is not None and self.dt_override <= 0.0:
            raise ValueError("dt_override must be positive when given")
        if self.domain is Domain.PERIODIC:
            if self.half_width is None or self.half_width <= 0.0:
                raise ValueError("periodic domain needs a positive half_width")


@dataclass(frozen=True)
class FluidGrid:
    """Cell averages on a uniform mesh; the particle sits between cells 0 and 1.

    Cell j (j from j_min upward) occupies [left_edge + (j - j_min) * dx,
    left_edge + (j - j_min + 1) * dx) in the lab frame.
    """

    u: np.ndarray
    dx: float
    left_edge: float
    j_min: int
    periodic: bool = False

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u)
        if self.dx <= 0.0:
            raise ValueError(f"cell width must be positive, got dx={self.dx}")
        if u.ndim != 1 or u.shape[0] < 4:
            raise ValueError("grid needs at least 4 cells")
        if not np.all(np.isfinite(u)):
            raise ValueError("cell values must be finite")
        p0 = -self.j_min
        if not (0 <= p0 < u.shape[0] - 1):
            raise ValueError("particle interface must lie inside the grid")

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def particle_index(self) -> int:
        """Array index of cell 0 (the cell immediately left of the particle)."""
        return -self.j_min

    @property
    def right_edge(self) -> float:
        return self.left_edge + self.n * self.dx

    @property
    def interface_position(self) -> float:
        return self.left_edge + (self.particle_index + 1) * self.dx

    def cell_edges(self) -> np.ndarray:
        return self.left_edge + self.dx * np.arange(self.n + 1)

    def cell_centers(self) -> np.ndarray:
        return self.left_edge + self.dx * (np.arange(self.n) + 0.5)


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed record of a run: particle path, snapshots, diagnostics.

    ``boundary_flux`` is the cumulative momentum that left the (co-moving)
    padded window through its edges; the exact discrete conservation law is
    momentum(t_n) + boundary_flux(t_n) == momentum(0).  It is identically
    zero on periodic domains and for data with equal far-field fluxes.
    """

    times: np.ndarray
    h: np.ndarray
    v: np.ndarray
    snapshots: list[tuple[float, FluidGrid]]
    records: list[DiagnosticsRecord]
    env: BoundsEnvelope
    cfg: SchemeConfig
    dx: float
    boundary_flux: np.ndarray


def _effective_mu(cfg: SchemeConfig, env: BoundsEnvelope, dx: float) -> float:
    if cfg.dt_override is not None:
        return cfg.dt_override / dx
    L = lipschitz_bound(cfg.bulk, cfg.iface, env.m, env.M, env.v_lo, env.v_hi, cfg.lam)
    return cfg.mu if L == 0.0 else min(cfg.mu, 0.5 / L)


def init_state(
    u0: PiecewiseConstant,
    h0: float,
    v0: float,
    cfg: SchemeConfig,
    dx: float,
) -> tuple[FluidGrid, ParticleState]:
    """Exact cell averaging of the initial datum on a mesh aligned with h0.

    The padded domain covers the datum's support widened by three times the
    distance a disturbance can travel before the final time (one cell per
    step).  The periodic domain uses the configured half width, rejected when
    smaller than 3*T/mu.
    """
    if dx <= 0.0:
        raise ValueError(f"cell width must be positive, got dx={dx}")
    if not (math.isfinite(h0) and math.isfinite(v0)):
        raise ValueError("initial position and velocity must be finite")
    env = bounds_envelope(u0, v0, cfg.lam, split=h0)
    if cfg.domain is Domain.PERIODIC:
        a = cfg.half_width
        guard = 3.0 * cfg.T / cfg.mu
        if a < guard:
            raise ValueError(
                f"periodic half_width {a} is below the influence guard 3*T/mu = {guard}"
            )
        m_c = max(2, round(a / dx))
        n_left = n_right = m_c
        j_min = 1 - m_c
    else:
        mu_eff = _effective_mu(cfg, env, dx)
        # Three times the influence length, plus a few cells so no datum
        # feature starts inside the boundary guard zone.
        pad = 3.0 * cfg.T / mu_eff + 6.0 * dx
        bps = u0.breakpoints or (h0,)
        span_lo = min(h0, min(bps))
        span_hi = max(h0, max(bps))
        n_left = max(6, math.ceil((h0 - (span_lo - pad)) / dx))
        n_right = max(6, math.ceil(((span_hi + pad) - h0) / dx))
        j_min = 1 - n_left
    # anchor the mesh at the particle so the interface sits exactly at h0
    edges = h0 + dx * (np.arange(n_left + n_right + 1) - n_left)
    left_edge = float(edges[0])
    u = u0.cell_averages(edges)
    grid = FluidGrid(
        u=u,
        dx=dx,
        left_edge=left_edge,
        j_min=j_min,
        periodic=cfg.domain is Domain.PERIODIC,
    )
    return grid, ParticleState(h=h0, v=v0, m_p=cfg.m_p)


def compute_dt(
    grid: FluidGrid,
    particle: ParticleState,
    cfg: SchemeConfig,
    env: BoundsEnvelope,
) -> float:
    """Largest time step honoring the CFL condition L*mu <= 1/2 and, for the
    explicit velocity update, the mass condition 4*L*dt/m_p <= 1."""
    L = lipschitz_bound(cfg.bulk, cfg.iface, env.m, env.M, env.v_lo, env.v_hi, cfg.lam)
    if not math.isfinite(L):
        raise ValueError("non-finite Lipschitz bound")
    mu_eff = cfg.mu if L == 0.0 else min(cfg.mu, 0.5 / L)
    dt = mu_eff * grid.dx
    if cfg.velocity_update is VelocityUpdate.EXPLICIT and L > 0.0:
        dt = min(dt, particle.m_p / (4.0 * L))
    return dt


def _fluid_update(
    grid: FluidGrid, v_flux: float, mu_step: float, fm: float, fp: float, cfg: SchemeConfig
) -> np.ndarray:
    """Flux-difference update of all cells at flux speed v_flux."""
    u = grid.u
    n = grid.n
    p0 = grid.particle_index
    if grid.periodic:
        F = bulk_flux(cfg.bulk, u, np.roll(u, -1), v_flux)
        FR = F.copy()
        FR[p0] = fm
        FL = np.roll(F, 1)
        FL[p0 + 1] = fp
        return u - mu_step * (FR - FL)
    # F[i] is the flux between cells i and i+1; cells 1 .. n-2 are updated,
    # the outermost cells copy their neighbor afterwards.
    F = bulk_flux(cfg.bulk, u[:-1], u[1:], v_flux)
    right = F[1:].copy()
    right[p0 - 1] = fm
    left = F[:-1].copy()
    left[p0] = fp
    u_new = u.copy()
    u_new[1:-1] = u[1:-1] - mu_step * (right - left)
    # Guard: the two flux-updated cells next to each boundary must stay
    # untouched, otherwise the padding was too narrow for this run.
    if (
        u_new[1] != u[1]
        or u_new[2] != u[2]
        or u_new[n - 2] != u[n - 2]
        or u_new[n - 3] != u[n - 3]
    ):
        raise BoundaryGuardError(
            "disturbance reached the padded boundary; enlarge the domain"
        )
    u_new[0] = u_new[1]
    u_new[-1] = u_new[-2]
    return u_new


def _require_stencil(grid: FluidGrid):
    p0 = grid.particle_index
    if grid.periodic:
        if p0 < 1 or grid.n - (p0 + 1) < 1:
            raise ValueError("need at least 1 cell on each side of the particle")
    elif p0 < 3 or grid.n - (p0 + 2) < 3:
        # keep the particle cells clear of the boundary guard zone
        raise ValueError("need at least 3 cells on each side of the particle")


def step(
    grid: FluidGrid,
    particle: ParticleState,
    cfg: SchemeConfig,
    dt: float,
) -> tuple[FluidGrid, ParticleState]:
    """One explicit step: fluxes and velocity update evaluated at v^n."""
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got dt={dt}")
    _require_stencil(grid)
    u = grid.u
    p0 = grid.particle_index
    v = particle.v
    fm, fp = interface_fluxes(
        cfg.iface, cfg.bulk, float(u[p0]), float(u[p0 + 1]), v, cfg.lam
    )
    u_new = _fluid_update(grid, v, dt / grid.dx, float(fm), float(fp), cfg)
    v_new = v + (dt / particle.m_p) * (float(fm) - float(fp))
    new_grid = FluidGrid(
        u=u_new,
        dx=grid.dx,
        left_edge=grid.left_edge + v * dt,
        j_min=grid.j_min,
        periodic=grid.periodic,
    )
    return new_grid, ParticleState(h=particle.h + v * dt, v=v_new, m_p=particle.m_p)


def _solve_implicit_velocity(
    u0: float, u1: float, particle: ParticleState, cfg: SchemeConfig, dt: float
) -> float:
    """Root of w - v^n - (dt/m_p) * (g_minus - g_plus)(u0, u1, w).

    A short damped fixed-point iteration handles the contractive (heavy
    particle) case; otherwise bisection on a bracket spanning the reachable
    velocities, which is unconditionally convergent.
    """
    v_n = particle.v
    scale = dt / particle.m_p

    def drag(w: float) -> float:
        gm, gp = interface_fluxes(cfg.iface, cfg.bulk, u0, u1, w, cfg.lam)
        return float(gm) - float(gp)

    def resid(w: float) -> float:
        return w - v_n - scale * drag(w)

    w = v_n
    for _ in range(8):
        w = 0.5 * (w + (v_n + scale * drag(w)))
    if abs(resid(w)) <= 1e-12:
        return w

    lo = min(u0, u1, v_n) - cfg.lam
    hi = max(u0, u1, v_n) + cfg.lam
    r_lo, r_hi = resid(lo), resid(hi)
    if r_lo > 0.0 or r_hi < 0.0:
        width = hi - lo
        lo, hi = lo - width, hi + width
        r_lo, r_hi = resid(lo), resid(hi)
        if r_lo > 0.0 or r_hi < 0.0:
            raise RuntimeError("implicit velocity equation is not bracketed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r_mid = resid(mid)
        if r_mid == 0.0 or hi - lo <= 1e-13:
            return mid
        if (r_mid > 0.0) == (r_hi > 0.0):
            hi, r_hi = mid, r_mid
        else:
            lo, r_lo = mid, r_mid
    raise RuntimeError("implicit velocity solve did not converge in 200 bisections")


def step_implicit(
    grid: FluidGrid,
    particle: ParticleState,
    cfg: SchemeConfig,
    dt: float,
) -> tuple[FluidGrid, ParticleState]:
    """One implicit step: all fluxes at v^{n+1}; the mesh still shifts by v^n."""
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got dt={dt}")
    _require_stencil(grid)
    u = grid.u
    p0 = grid.particle_index
    u0, u1 = float(u[p0]), float(u[p0 + 1])
    w = _solve_implicit_velocity(u0, u1, particle, cfg, dt)
    fm, fp = interface_fluxes(cfg.iface, cfg.bulk, u0, u1, w, cfg.lam)
    u_new = _fluid_update(grid, w, dt / grid.dx, float(fm), float(fp), cfg)
    v_new = particle.v + (dt / particle.m_p) * (float(fm) - float(fp))
    new_grid = FluidGrid(
        u=u_new,
        dx=grid.dx,
        left_edge=grid.left_edge + particle.v * dt,
        j_min=grid.j_min,
        periodic=grid.periodic,
    )
    return new_grid, ParticleState(
        h=particle.h + particle.v * dt, v=v_new, m_p=particle.m_p
    )


def run(
    u0: PiecewiseConstant,
    h0: float,
    v0: float,
    cfg: SchemeConfig,
    dx: float,
    snapshot_times: tuple[float, ...] = (),
    store_all: bool = False,
) -> Trajectory:
    """Integrate the coupled system up to the final time.

    The nominal step comes from ``compute_dt`` (or ``cfg.dt_override``); the
    last step is truncated so the final time is hit exactly.  Snapshots are
    stored at t = 0, at the final time, at every requested time (the state
    whose time slab covers it), or at every step with ``store_all``.
    """
    env = bounds_envelope(u0, v0, cfg.lam, split=h0)
    grid, particle = init_state(u0, h0, v0, cfg, dx)
    dt_nom = cfg.dt_override if cfg.dt_override is not None else compute_dt(
        grid, particle, cfg, env
    )
    if cfg.domain is Domain.PERIODIC and cfg.T > 0.0:
        a_eff = 0.5 * grid.n * dx
        guard = 3.0 * cfg.T * dx / dt_nom
        if a_eff < guard * (1.0 - 1e-12):
            raise ValueError(
                f"periodic half_width {a_eff} is below the effective influence "
                f"guard 3*T/mu_eff = {guard}"
            )
    req = sorted(set(float(t) for t in snapshot_times))
    if req and (req[0] < 0.0 or req[-1] > cfg.T):
        raise ValueError("snapshot times must lie in [0, T]")

    advance = step if cfg.velocity_update is VelocityUpdate.EXPLICIT else step_implicit

    times = [0.0]
    hs = [particle.h]
    vs = [particle.v]
    records = [make_record(grid, particle, cfg.lam, 0.0)]
    snapshots: list[tuple[float, FluidGrid]] = [(0.0, grid)]
    bflux = [0.0]
    next_req = 0
    t = 0.0
    eps = 1e-12 * max(1.0, cfg.T)
    while t < cfg.T - eps:
        remaining = cfg.T - t
        if dt_nom >= remaining - eps:
            dt = remaining
            t_next = cfg.T
        else:
            dt = dt_nom
            t_next = t + dt
        while next_req < len(req) and t <= req[next_req] < t_next:
            if snapshots[-1][0] != t:
                snapshots.append((t, grid))
            next_req += 1
        edge_states = None if grid.periodic else grid.u[[0, 1, -2, -1]].copy()
        grid, particle = advance(grid, particle, cfg, dt)
        prev_v = vs[-1]
        if edge_states is None:
            leak = 0.0
        else:
            # the implicit step evaluates all fluxes at the new velocity
            v_flux = prev_v if cfg.velocity_update is VelocityUpdate.EXPLICIT else particle.v
            ul0, ul1, ur0, ur1 = edge_states
            leak = dt * float(
                bulk_flux(cfg.bulk, ur0, ur1, v_flux)
                - bulk_flux(cfg.bulk, ul0, ul1, v_flux)
            )
        t = t_next
        times.append(t)
        hs.append(particle.h)
        vs.append(particle.v)
        bflux.append(bflux[-1] + leak)
        records.append(make_record(grid, particle, cfg.lam, t, prev_v, dt))
        if store_all and t != cfg.T:
            snapshots.append((t, grid))
    if snapshots[-1][0] != t:
        snapshots.append((t, grid))
    return Trajectory(
        times=np.asarray(times),
        h=np.asarray(hs),
        v=np.asarray(vs),
        snapshots=snapshots,
        records=records,
        env=env,
        cfg=cfg,
        dx=dx,
        boundary_flux=np.asarray(bflux),
    )


def sample_solution(traj: Trajectory, t: float, x: float) -> tuple[float, float, float]:
    """(u, h, v) of the numerical solution at lab-frame point (t, x).

    Time slabs are left-closed: t in [t^n, t^{n+1}) reads state n.  Within a
    slab the cells shear with the particle speed, the particle path is linear
    and the velocity constant.  Requires a stored snapshot covering t.
    """
    T = float(traj.times[-1])
    if not 0.0 <= t <= T:
        raise ValueError(f"time {t} outside [0, {T}]")
    idx = bisect_right(traj.times.tolist(), t) - 1
    t_n = float(traj.times[idx])
    v_n = float(traj.v[idx])
    h_val = float(traj.h[idx]) + v_n * (t - t_n)
    snap = next((g for ts, g in traj.snapshots if ts == t_n), None)
    if snap is None:
        raise ValueError(f"no snapshot covering t={t} (step time {t_n})")
    x_back = x - v_n * (t - t_n)
    k = math.floor((x_back - snap.left_edge) / snap.dx)
    if not 0 <= k < snap.n:
        raise ValueError(f"position {x} outside the stored grid at t={t}")
    return float(snap.u[k]), h_val, v_n
