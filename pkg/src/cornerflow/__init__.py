"""Vortex dynamics in 2D ideal flow, exterior or interior to corner domains.

The package models inviscid incompressible flow around (or inside) a simply
connected region whose boundary may carry corners, using a conformal map to
the unit-circle reference plane. Vorticity is carried by regularised point
vortices with exact boundary images; the transport is fixed-step RK4. On top
of the dynamics sit the diagnostics the theory asks for: conservation of the
circulation invariants, an a-priori support bound, a boundary-avoidance
functional with pinch and Gronwall certificates, and a free-space/wall
splitting of the velocity field with its harmonicity and projection checks.
"""

from ._backend import BACKEND_NAME, available_backends
from .errors import (
    BranchCutViolation,
    CirculationMismatch,
    CoincidentPoints,
    CoincidesWithParticle,
    ContourLeavesDomain,
    CornerflowError,
    DiskContainsVorticity,
    DiskLeavesRegion,
    EmptyEnsemble,
    EmptyTrace,
    FitDegenerate,
    InsufficientSamples,
    InteriorDomainHasNoFarField,
    InteriorDomainHasNoHarmonicField,
    ParseError,
    ParticleEscapedDomain,
    ParticleOnBoundary,
    PatchTouchesBoundary,
    PointOutsideDomain,
    PointOutsideTarget,
    SignConditionViolated,
    StepTooLarge,
    TooCloseToCorner,
    UnknownMapFamily,
    ValidationError,
)
from .biot_savart import (
    CirculationSpec,
    Contour,
    VortexEnsemble,
    VortexParticle,
    circulation_probe,
    green_function,
    harmonic_field,
    kernel_K,
    mapped_circle_contour,
    operator_R,
    sheet_density,
    velocity,
    velocity_field,
    winding_number,
)
from .config import RunConfig, TwinSpec, parse_config
from .conformal import (
    ConformalMap,
    CornerSpec,
    DomainSpec,
    MAP_FAMILIES,
    corner_exponent_probe,
    eval_derivative,
    eval_inverse,
    eval_map,
    farfield_coefficients,
    make_map,
)
from .harmonic_split import (
    GridSpec,
    SplitField,
    freespace_velocity,
    mean_value_residual,
    projection_inequality_check,
    twin_run_divergence,
)
from .lyapunov import (
    LyapunovTrace,
    check_L1_lower,
    check_L1_upper,
    dt_L1_formula,
    gronwall_monitor,
    orthogonality_residual,
    sign_conditions,
    stream_L1,
    technic_bound_check,
)
from .transport import (
    FlowState,
    PatchSpec,
    SimulationResult,
    auto_time_step,
    min_mapped_gap,
    patch_init,
    simulate,
    step_rk4,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "available_backends",
    "CornerflowError",
    "BranchCutViolation",
    "CirculationMismatch",
    "CoincidentPoints",
    "CoincidesWithParticle",
    "ContourLeavesDomain",
    "DiskContainsVorticity",
    "DiskLeavesRegion",
    "EmptyEnsemble",
    "EmptyTrace",
    "FitDegenerate",
    "InsufficientSamples",
    "InteriorDomainHasNoFarField",
    "InteriorDomainHasNoHarmonicField",
    "ParseError",
    "ParticleEscapedDomain",
    "ParticleOnBoundary",
    "PatchTouchesBoundary",
    "PointOutsideDomain",
    "PointOutsideTarget",
    "SignConditionViolated",
    "StepTooLarge",
    "TooCloseToCorner",
    "UnknownMapFamily",
    "ValidationError",
    "CirculationSpec",
    "Contour",
    "VortexEnsemble",
    "VortexParticle",
    "circulation_probe",
    "green_function",
    "harmonic_field",
    "kernel_K",
    "mapped_circle_contour",
    "operator_R",
    "sheet_density",
    "velocity",
    "velocity_field",
    "winding_number",
    "RunConfig",
    "TwinSpec",
    "parse_config",
    "ConformalMap",
    "CornerSpec",
    "DomainSpec",
    "MAP_FAMILIES",
    "corner_exponent_probe",
    "eval_derivative",
    "eval_inverse",
    "eval_map",
    "farfield_coefficients",
    "make_map",
    "GridSpec",
    "SplitField",
    "freespace_velocity",
    "mean_value_residual",
    "projection_inequality_check",
    "twin_run_divergence",
    "LyapunovTrace",
    "check_L1_lower",
    "check_L1_upper",
    "dt_L1_formula",
    "gronwall_monitor",
    "orthogonality_residual",
    "sign_conditions",
    "stream_L1",
    "technic_bound_check",
    "FlowState",
    "PatchSpec",
    "SimulationResult",
    "auto_time_step",
    "min_mapped_gap",
    "patch_init",
    "simulate",
    "step_rk4",
    "__version__",
]
