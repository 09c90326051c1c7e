"""Single-layer panel solve of the exterior unit-potential problem.

Piecewise-constant charge density per face, collocated at face centroids:
the dense matrix of panel potentials is solved against the all-ones right
hand side.  Self entries use the exact in-plane triangle integral, near
entries subdivided quadrature, far entries the centroid rule.  Matrix rows
are independent (assembled in parallel by the backend); the solve itself is
one synchronized dense step and the resulting density is immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import backends
from .constants import UNIT_SPHERE_AREA
from .errors import SolveError
from .mesh import TriMesh

MAX_DENSE_FACES = 20_000


@dataclass(frozen=True)
class SurfaceDensity:
    """Per-face charge density (charge per unit area) on a mesh."""

    mesh: TriMesh
    sigma: np.ndarray

    def __post_init__(self):
        if len(self.sigma) != self.mesh.n_faces:
            raise ValueError("density length does not match face count")
        if not np.all(np.isfinite(self.sigma)):
            raise SolveError("density has non-finite entries")


@dataclass(frozen=True)
class CapacityEstimate:
    """Capacity in length units; Cap(ball of radius R) = R."""

    value: float
    method: str  # "total-charge" or "flux"
    discretization: int  # face count behind the estimate

    def __post_init__(self):
        if not (self.value > 0):
            raise SolveError(f"capacity must be positive, got {self.value}")


def assemble_matrix(mesh: TriMesh) -> np.ndarray:
    """Dense collocation matrix A[i, j] = potential of panel j at centroid i."""
    if mesh.n_faces > MAX_DENSE_FACES:
        raise SolveError(
            f"mesh has {mesh.n_faces} faces; dense solve capped at {MAX_DENSE_FACES}"
        )
    return backends.assemble(
        mesh.v0, mesh.v1, mesh.v2,
        mesh.face_centroids, mesh.face_areas, mesh.face_diameters,
        mesh.face_normals,
    )


def solve_density(mesh: TriMesh) -> SurfaceDensity:
    """Charge density producing unit potential on the boundary."""
    a_mat = assemble_matrix(mesh)
    try:
        sigma = scipy.linalg.solve(a_mat, np.ones(mesh.n_faces))
    except scipy.linalg.LinAlgError as exc:
        raise SolveError(f"dense solve failed: {exc}") from exc
    if not np.all(np.isfinite(sigma)):
        cond = np.linalg.cond(a_mat)
        raise SolveError(f"dense solve produced non-finite density (cond ~ {cond:.3e})")
    return SurfaceDensity(mesh=mesh, sigma=sigma)


def capacity(density: SurfaceDensity) -> CapacityEstimate:
    """Capacity from the total charge (the far-field 1/|x| coefficient)."""
    total_charge = float(np.dot(density.sigma, density.mesh.face_areas))
    return CapacityEstimate(
        value=total_charge / UNIT_SPHERE_AREA,
        method="total-charge",
        discretization=density.mesh.n_faces,
    )


def capacity_flux(field, level) -> CapacityEstimate:
    """Capacity from the speed flux through a level surface.

    The flux of |Du| is the same through every level surface, so this is an
    independent estimator of the same coefficient.
    """
    if len(level.areas) == 0:
        raise SolveError("empty level surface")
    flux = float(np.dot(level.samples.speed, level.areas))
    return CapacityEstimate(
        value=flux / UNIT_SPHERE_AREA,
        method="flux",
        discretization=field.density.mesh.n_faces,
    )
