"""potlab: exterior electrostatics laboratory.

Solves the exterior unit-potential problem for a charged body with a
single-layer panel method, extracts constant-potential surfaces, tabulates
the monotone level-surface moments of the field speed, and checks the sharp
capacity/curvature inequalities against closed-form oracles.
"""

__version__ = "0.1.0"

from .backends import BACKEND
from .errors import (
    ConfigError,
    DomainError,
    ExtractionError,
    MeshError,
    PotlabError,
    SolveError,
)
from .field import (
    FieldSample,
    FieldSamples,
    PotentialField,
    asymptotic_fit,
    ball_oracle_sample,
    sample_field,
)
from .inequalities import (
    InequalityReport,
    OverdeterminedResidual,
    check_cap_bounds,
    check_lp_gradient,
    check_willmore,
    overdetermined_residual,
)
from .levelset import (
    GridSpec,
    LevelSurface,
    boundary_level,
    dump_off,
    extract_level,
    surface_integral,
)
from .mesh import (
    AnalyticShape,
    Ball,
    Ellipsoid,
    TriMesh,
    load_mesh,
    make_shape,
    mean_curvature,
    save_off,
)
from .monotone import (
    MonotoneProfile,
    build_profile,
    build_profiles,
    compute_Phi,
    compute_Phi_prime,
    compute_Up,
    compute_Up_prime,
)
from .oracle import (
    OracleValue,
    ball_Up,
    ellipsoid_capacity,
    ellipsoid_mean_curvature,
)
from .solver import (
    CapacityEstimate,
    SurfaceDensity,
    capacity,
    capacity_flux,
    solve_density,
)

__all__ = [
    "BACKEND",
    "AnalyticShape",
    "Ball",
    "CapacityEstimate",
    "ConfigError",
    "DomainError",
    "Ellipsoid",
    "ExtractionError",
    "FieldSample",
    "FieldSamples",
    "GridSpec",
    "InequalityReport",
    "LevelSurface",
    "MeshError",
    "MonotoneProfile",
    "OracleValue",
    "OverdeterminedResidual",
    "PotentialField",
    "PotlabError",
    "SolveError",
    "SurfaceDensity",
    "TriMesh",
    "asymptotic_fit",
    "ball_Up",
    "ball_oracle_sample",
    "boundary_level",
    "build_profile",
    "build_profiles",
    "capacity",
    "capacity_flux",
    "check_cap_bounds",
    "check_lp_gradient",
    "check_willmore",
    "compute_Phi",
    "compute_Phi_prime",
    "compute_Up",
    "compute_Up_prime",
    "dump_off",
    "ellipsoid_capacity",
    "ellipsoid_mean_curvature",
    "extract_level",
    "load_mesh",
    "make_shape",
    "mean_curvature",
    "overdetermined_residual",
    "sample_field",
    "save_off",
    "solve_density",
    "surface_integral",
]
