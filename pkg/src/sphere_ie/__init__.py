"""Numerical verification of integral identities for hypersurfaces in round spheres."""

from .catalog import (
    CartanCubic,
    CliffordTorus,
    Equator,
    IsoparametricProfile,
    SurfaceSpecError,
    Transformed,
    parse_surface,
    profile_lambdas,
)
from .checks import CHECKS, CheckResult, VerifyContext, run_check
from .geometry import SurfacePoint, curvature_invariants, shape_from_level_set, tangent_frame
from .integrators import MonteCarlo, Quadrature, directional_integrals, ie_defect, integrate

__all__ = [
    "CHECKS",
    "CartanCubic",
    "CheckResult",
    "CliffordTorus",
    "Equator",
    "IsoparametricProfile",
    "MonteCarlo",
    "Quadrature",
    "SurfacePoint",
    "SurfaceSpecError",
    "Transformed",
    "VerifyContext",
    "curvature_invariants",
    "directional_integrals",
    "ie_defect",
    "integrate",
    "parse_surface",
    "profile_lambdas",
    "run_check",
    "shape_from_level_set",
    "tangent_frame",
]
