"""Rotationally symmetric CMC hypersurfaces in slabs of model spaces.

The package generates constant-mean-curvature hypersurfaces of revolution
with free or capillary boundary in slabs ``M^n(kappa) x [0, l]``, assembles
their Jacobi (stability) operators mode by mode, and runs the
volume-constrained stability decision procedure, including the closed-form
cylinder and tube criteria and the slab-width nonexistence bounds.
"""

from .errors import (
    AxisCrossingError,
    DegenerateOrbitError,
    GeometryDomainError,
    NoSolutionError,
    SolverFailure,
    StiffnessError,
)
from .geometry import (
    GeodesicSphere,
    SpaceForm,
    WarpedSlab,
    c_kappa,
    c_kappa_inv,
    slice_shape,
    sn_ct,
    sphere_potential,
    sphere_spectrum,
)
from .profile import (
    ProfileCurve,
    RotationalSurface,
    cylinder_surface,
    ode_rhs,
    shoot_capillary,
    shoot_free_boundary,
    shoot_profiles,
    surface_fields,
)
from .operators import (
    BoundaryCondition,
    Spectrum,
    SpectrumEntry,
    SturmLiouvilleProblem,
    assemble_mode,
    circle_factor_spectrum,
    cylinder_free_spectrum,
    discretize,
    merge_modes,
)
from .spectral import (
    ExtrapolationResult,
    SolverConfig,
    TridiagonalPencil,
    eig_lowest,
    refine_extrapolate,
    solve_deflated,
    sturm_count,
)
from .stability import (
    CapillaryBoundary,
    StabilityVerdict,
    capillary_q,
    curve_lambda1_upper,
    cylinder_stable,
    decide_surface,
    koiso_decide,
    nonexistence_width,
    rosenberg_bound,
    tube_threshold_numeric,
    tube_verdict,
)

__all__ = [
    "AxisCrossingError",
    "BoundaryCondition",
    "CapillaryBoundary",
    "DegenerateOrbitError",
    "ExtrapolationResult",
    "GeodesicSphere",
    "GeometryDomainError",
    "NoSolutionError",
    "ProfileCurve",
    "RotationalSurface",
    "SolverConfig",
    "SolverFailure",
    "SpaceForm",
    "Spectrum",
    "SpectrumEntry",
    "StabilityVerdict",
    "StiffnessError",
    "SturmLiouvilleProblem",
    "TridiagonalPencil",
    "WarpedSlab",
    "assemble_mode",
    "c_kappa",
    "c_kappa_inv",
    "capillary_q",
    "circle_factor_spectrum",
    "curve_lambda1_upper",
    "cylinder_free_spectrum",
    "cylinder_stable",
    "cylinder_surface",
    "decide_surface",
    "discretize",
    "eig_lowest",
    "koiso_decide",
    "merge_modes",
    "nonexistence_width",
    "ode_rhs",
    "refine_extrapolate",
    "rosenberg_bound",
    "shoot_capillary",
    "shoot_free_boundary",
    "shoot_profiles",
    "slice_shape",
    "sn_ct",
    "solve_deflated",
    "sphere_potential",
    "sphere_spectrum",
    "sturm_count",
    "surface_fields",
    "tube_threshold_numeric",
    "tube_verdict",
]

__version__ = "0.1.0"
