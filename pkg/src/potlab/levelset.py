"""Level-surface extraction and quadrature.

Surfaces of constant potential are realized by marching cubes over a grid of
potential values, after which every extracted vertex (and every quadrature
centroid) is Newton-projected onto the exact level along the field gradient.
The body boundary itself (t = 1) bypasses the grid: quadrature runs over the
input mesh, with the boundary speed taken from the one-sided exterior limit
(the single-layer jump, which for unit boundary data is the panel density)
and the curvature from the mesh module.

Grid sampling and per-triangle quadrature are data parallel; topology
assembly is one synchronized pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np
from skimage.measure import marching_cubes

from .errors import ExtractionError
from .field import FieldSamples, PotentialField
from .mesh import face_mean_curvatures, save_off

DEFAULT_RESOLUTION = 96
MIN_RESOLUTION = 16
LEVEL_TOL = 1e-4          # |u - t| bound on accepted quadrature samples
NEWTON_TOL = 1e-10        # projection tolerance in u
NEWTON_MAX_ITER = 5
BOX_SAFETY = 3.0          # auto box: radius >= BOX_SAFETY * capacity / t
OFFSET_FACTOR = 0.5       # boundary Hessian offset, times panel diameter
NEAR_BOUNDARY_T = 0.95    # above this, levels hug the body: offset extraction


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned sampling box with a common per-axis cell count."""

    lo: np.ndarray
    hi: np.ndarray
    resolution: int

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=np.float64))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=np.float64))
        if self.resolution < MIN_RESOLUTION:
            raise ExtractionError(
                f"grid resolution must be >= {MIN_RESOLUTION}, got {self.resolution}"
            )
        if not np.all(self.hi > self.lo):
            raise ExtractionError("grid box is empty")

    @property
    def spacing(self) -> np.ndarray:
        return (self.hi - self.lo) / self.resolution

    def axes(self):
        n = self.resolution + 1
        return tuple(np.linspace(self.lo[d], self.hi[d], n) for d in range(3))


@dataclass
class LevelSurface:
    """Triangulated constant-potential surface with per-triangle samples."""

    t: float
    vertices: np.ndarray
    faces: np.ndarray
    areas: np.ndarray
    samples: FieldSamples
    skipped_fraction: float
    closure_defect: float
    grid: GridSpec | None = None
    _triangles: np.ndarray | None = dataclass_field(default=None, repr=False)

    @property
    def triangles(self) -> np.ndarray:
        if self._triangles is None:
            self._triangles = self.vertices[self.faces]
        return self._triangles

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def __len__(self) -> int:
        return len(self.faces)


def auto_grid(field: PotentialField, t: float,
              resolution: int = DEFAULT_RESOLUTION) -> GridSpec:
    """Bounding box guaranteed to contain the level surface.

    The surface of level t sits near radius capacity/t once the far-field
    behaviour dominates; a safety factor covers the transition region, and
    twice the body diameter covers levels hugging the boundary.
    """
    mesh = field.mesh
    radius = max(2.0 * mesh.diameter, BOX_SAFETY * field.capacity.value / t)
    center = mesh.center
    return GridSpec(center - radius, center + radius, resolution)


def _newton_project(field: PotentialField, points: np.ndarray, t: float,
                    step_cap: float) -> np.ndarray:
    """Project points onto {u = t} along the gradient (capped Newton)."""
    pts = points.copy()
    active = np.arange(len(pts))
    for _ in range(NEWTON_MAX_ITER):
        u, grad, _ = field.evaluate(pts[active], order=1)
        misfit = t - u
        done = np.abs(misfit) <= NEWTON_TOL
        if np.all(done):
            active = active[:0]
            break
        keep = ~done
        active = active[keep]
        grad = grad[keep]
        misfit = misfit[keep]
        speed2 = np.einsum("ij,ij->i", grad, grad)
        step = (misfit / np.maximum(speed2, 1e-300))[:, None] * grad
        norm = np.linalg.norm(step, axis=1)
        too_big = norm > step_cap
        if np.any(too_big):
            step[too_big] *= (step_cap / norm[too_big])[:, None]
        pts[active] += step
    return pts


def _solve_along_rays(field: PotentialField, origins, directions, t,
                      s_init, max_iter=20):
    """Root-find u(origin + s * dir) = t per ray (damped Newton).

    Directions point into the exterior, along which the potential decreases
    near the surface.  The offset may go negative: very close to the
    boundary the discrete level weaves slightly inside the panel surface
    around vertices, and the crossing there sits at s < 0.
    """
    s = np.array(s_init, dtype=np.float64)
    typical = abs(float(np.mean(s_init))) + 1e-12
    step_cap = 0.25 * float(field.mesh.face_diameters.mean()) + 4.0 * typical
    pts = origins + s[:, None] * directions
    for _ in range(max_iter):
        u, grad, _ = field.evaluate(pts, order=1)
        if np.all(np.abs(u - t) <= NEWTON_TOL):
            break
        slope = np.einsum("ij,ij->i", grad, directions)
        degenerate = slope >= -1e-12
        slope = np.where(degenerate, -max(1.0 - t, 1e-6) / typical, slope)
        step = np.clip((t - u) / slope, -step_cap, step_cap)
        s = s + step
        pts = origins + s[:, None] * directions
    u, _, _ = field.evaluate(pts, order=1)
    if np.max(np.abs(u - t)) > LEVEL_TOL:
        raise ExtractionError(
            f"ray projection onto level {t} failed "
            f"(worst |u - t| = {np.max(np.abs(u - t)):.3g})"
        )
    return pts


def _offset_level(field: PotentialField, t: float) -> LevelSurface:
    """Near-boundary level: push the body mesh outward onto {u = t}.

    Marching cubes cannot separate a level hugging the boundary from the
    body at practical grid resolutions (interpolation seeds fall inside the
    body, where the potential is flat); the normal-offset construction keeps
    the mesh connectivity and solves a 1-d problem per vertex instead.
    """
    mesh = field.mesh
    sigma = field.density.sigma
    # |Du| ~ sigma near the boundary, so (1 - t)/sigma estimates the gap
    face_guess = (1.0 - t) / np.maximum(sigma, 1e-12)
    vertex_guess = np.full(mesh.n_vertices, face_guess.mean())
    verts = _solve_along_rays(field, mesh.vertices, mesh.vertex_normals, t,
                              vertex_guess)
    faces = mesh.faces.copy()
    tri = verts[faces]
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    closure = float(np.linalg.norm(cross.sum(axis=0)) / 2.0)
    centroids = _solve_along_rays(field, mesh.face_centroids,
                                  mesh.face_normals, t, face_guess)
    u_s, grad_s, hess_s = field.evaluate(centroids, order=2)
    samples = FieldSamples(centroids, u_s, grad_s, hess_s, field.eps_grad)
    skipped = float(areas[~samples.curvature_ok].sum() / areas.sum())
    return LevelSurface(
        t=t, vertices=verts, faces=faces, areas=areas, samples=samples,
        skipped_fraction=skipped, closure_defect=closure, grid=None,
    )


def extract_level(field: PotentialField, t: float,
                  grid: GridSpec | None = None,
                  resolution: int = DEFAULT_RESOLUTION) -> LevelSurface:
    """Extraction of {u = t}, Newton-projected onto the exact level.

    Levels below ``NEAR_BOUNDARY_T`` are extracted by marching cubes over a
    grid of potential values (interior nodes reflected above 1 so only the
    true level crossing is seen); levels hugging the boundary use the
    normal-offset construction unless an explicit grid is given.  Requires
    0 < t < 1; the boundary itself is served by :func:`boundary_level`.
    """
    if not 0.0 < t < 1.0:
        raise ExtractionError(f"level value must be in (0, 1), got {t}")
    if grid is None and t >= NEAR_BOUNDARY_T:
        return _offset_level(field, t)
    if grid is None:
        grid = auto_grid(field, t, resolution)
    ax, ay, az = grid.axes()
    nodes = np.stack(np.meshgrid(ax, ay, az, indexing="ij"), axis=-1)
    flat = nodes.reshape(-1, 3)
    u = field.potential(flat)

    # Reflect interior values above 1 so the extraction only ever sees the
    # exterior branch of the potential (guards against quadrature wiggles
    # and puts interpolation seeds on the exterior side).
    mesh = field.mesh
    lo, hi = mesh.bbox
    margin = 1e-9 * mesh.diameter
    candidates = np.nonzero(
        np.all((flat >= lo - margin) & (flat <= hi + margin), axis=1)
    )[0]
    if len(candidates):
        inside = ~field.is_exterior(flat[candidates])
        u[candidates[inside]] = 2.0 - u[candidates[inside]]
    u = u.reshape(nodes.shape[:3])

    boundary_max = max(
        u[0].max(), u[-1].max(), u[:, 0].max(), u[:, -1].max(),
        u[:, :, 0].max(), u[:, :, -1].max(),
    )
    if boundary_max >= t:
        raise ExtractionError(
            f"level surface {t} reaches the grid boundary "
            f"(max boundary potential {boundary_max:.3g}); enlarge the box"
        )
    if u.max() <= t:
        raise ExtractionError(f"empty extraction: potential never reaches {t}")

    try:
        verts, faces, _, _ = marching_cubes(u, level=t, spacing=tuple(grid.spacing))
    except (ValueError, RuntimeError) as exc:
        raise ExtractionError(f"marching cubes failed at level {t}: {exc}") from exc
    verts = verts + grid.lo[None, :]

    step_cap = float(grid.spacing.max())
    verts = _newton_project(field, verts, t, step_cap)

    tri = verts[faces]
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    keep = areas > 1e-12 * float(np.max(areas))
    faces, tri, cross, areas = faces[keep], tri[keep], cross[keep], areas[keep]
    if len(faces) == 0:
        raise ExtractionError(f"empty extraction at level {t}")

    # outward orientation (positive enclosed volume)
    volume = float(np.einsum("ij,ij->i", tri[:, 0],
                             np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0)
    if volume < 0:
        faces = faces[:, ::-1]
        cross = -cross
    closure = float(np.linalg.norm(cross.sum(axis=0)) / 2.0)

    centroids = tri.mean(axis=1)
    centroids = _newton_project(field, centroids, t, step_cap)
    u_s, grad_s, hess_s = field.evaluate(centroids, order=2)
    if np.max(np.abs(u_s - t)) > LEVEL_TOL:
        raise ExtractionError(
            f"projected samples deviate from the level by "
            f"{np.max(np.abs(u_s - t)):.3g} (> {LEVEL_TOL})"
        )
    samples = FieldSamples(centroids, u_s, grad_s, hess_s, field.eps_grad)
    skipped = float(areas[~samples.curvature_ok].sum() / areas.sum())
    return LevelSurface(
        t=t, vertices=verts, faces=faces, areas=areas, samples=samples,
        skipped_fraction=skipped, closure_defect=closure, grid=grid,
    )


def boundary_level(field: PotentialField) -> LevelSurface:
    """The t = 1 level: quadrature over the input mesh itself.

    Boundary speed is the one-sided exterior limit |Du| = sigma (the
    single-layer jump against the constant interior field); curvature comes
    from the mesh (analytic for generated shapes, cotangent otherwise).  The
    Hessian is evaluated just off the surface and kept for diagnostics only.
    """
    mesh = field.mesh
    sigma = field.density.sigma
    offsets = mesh.face_centroids + (
        OFFSET_FACTOR * mesh.face_diameters[:, None] * mesh.face_normals
    )
    _, _, hess = field.evaluate(offsets, order=2)
    samples = FieldSamples(
        mesh.face_centroids.copy(),
        np.ones(mesh.n_faces),
        -sigma[:, None] * mesh.face_normals,
        hess,
        field.eps_grad,
    )
    h_face = face_mean_curvatures(mesh)
    samples.H = h_face
    samples.H_conf = h_face - 2.0 * samples.speed
    cross = np.cross(mesh.v1 - mesh.v0, mesh.v2 - mesh.v0)
    closure = float(np.linalg.norm(cross.sum(axis=0)) / 2.0)
    skipped = float(mesh.face_areas[~samples.curvature_ok].sum() / mesh.total_area)
    return LevelSurface(
        t=1.0, vertices=mesh.vertices.copy(), faces=mesh.faces.copy(),
        areas=mesh.face_areas.copy(), samples=samples,
        skipped_fraction=skipped, closure_defect=closure, grid=None,
    )


def surface_integral(level: LevelSurface, integrand, surrogate=None) -> float:
    """Area-weighted sum of a per-sample integrand over the surface.

    ``integrand`` maps the sample batch to per-triangle values.  Samples
    below the speed cutoff contribute through ``surrogate`` when given
    (the bounded rewriting of curvature-carrying integrands), otherwise
    zero; either way they are tracked by ``level.skipped_fraction``.
    """
    if len(level) == 0:
        raise ExtractionError("empty level surface")
    values = np.asarray(integrand(level.samples), dtype=np.float64)
    flagged = ~level.samples.curvature_ok
    if np.any(flagged):
        if surrogate is not None:
            replacement = np.asarray(surrogate(level.samples), dtype=np.float64)
            values = np.where(flagged, replacement, values)
        else:
            values = np.where(flagged, 0.0, values)
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise ExtractionError(
            f"integrand produced a non-finite value at triangle "
            f"{int(np.nonzero(bad)[0][0])}"
        )
    return float(np.dot(values, level.areas))


def dump_off(level: LevelSurface, path) -> None:
    """Write the level surface to an OFF file for inspection."""
    save_off(path, level.vertices, level.faces)
