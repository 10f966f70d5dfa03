"""Finite-volume simulation of the inviscid Burgers equation coupled to a
pointwise particle through a drag force."""

from .exact import ParticleRiemannProblem, germ2_exact, germ2_path, ode_oracle
from .flux import BulkFluxKind, InterfaceFluxKind, bulk_flux, f_v, interface_fluxes, lipschitz_bound
from .germ import GermRegion, classify, dist1_to_H, kruzhkov_flux, project_to_H, xi
from .scheme import (
    BoundaryGuardError,
    Domain,
    FluidGrid,
    ParticleState,
    PiecewiseConstant,
    SchemeConfig,
    Trajectory,
    VelocityUpdate,
    compute_dt,
    init_state,
    run,
    sample_solution,
    step,
    step_implicit,
)
from .diagnostics import (
    BoundsEnvelope,
    ConvergenceRow,
    DiagnosticsRecord,
    bounds_envelope,
    convergence_study,
    dissipativity_probe,
    entropy_residual,
    maximality_probe,
    total_momentum,
    total_variation,
)

__all__ = [
    "BoundaryGuardError",
    "BoundsEnvelope",
    "BulkFluxKind",
    "ConvergenceRow",
    "DiagnosticsRecord",
    "Domain",
    "FluidGrid",
    "GermRegion",
    "InterfaceFluxKind",
    "ParticleRiemannProblem",
    "ParticleState",
    "PiecewiseConstant",
    "SchemeConfig",
    "Trajectory",
    "VelocityUpdate",
    "bounds_envelope",
    "bulk_flux",
    "classify",
    "compute_dt",
    "convergence_study",
    "dissipativity_probe",
    "dist1_to_H",
    "entropy_residual",
    "f_v",
    "germ2_exact",
    "germ2_path",
    "init_state",
    "interface_fluxes",
    "kruzhkov_flux",
    "lipschitz_bound",
    "maximality_probe",
    "ode_oracle",
    "project_to_H",
    "run",
    "sample_solution",
    "step",
    "step_implicit",
    "total_momentum",
    "total_variation",
    "xi",
]
