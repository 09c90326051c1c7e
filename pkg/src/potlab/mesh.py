"""Closed triangulated surfaces: ingestion, analytic shapes, curvature.

A :class:`TriMesh` is validated at construction: triangle areas above a
scale-relative floor, every edge shared by exactly two faces with opposite
traversal, and outward orientation (positive enclosed volume; a globally
reversed mesh is flipped rather than rejected, since OFF/OBJ files in the
wild disagree on winding).  After construction all queries are pure, so a
mesh can be shared read-only across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, MeshError

AREA_FLOOR_FACTOR = 1e-12  # times bounding-box diagonal squared
ON_SURFACE_TOL = 1e-9      # times shape scale, for analytic curvature queries


@dataclass(frozen=True)
class Ball:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def semi_axes(self):
        return (self.radius, self.radius, self.radius)


@dataclass(frozen=True)
class Ellipsoid:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a >= self.b >= self.c > 0):
            raise ValueError("ellipsoid semi-axes must satisfy a >= b >= c > 0")

    @property
    def semi_axes(self):
        return (self.a, self.b, self.c)


AnalyticShape = Ball | Ellipsoid


class TriMesh:
    """Closed, outward-oriented triangle mesh.

    Parameters
    ----------
    vertices : (V, 3) array of vertex positions.
    faces : (F, 3) integer array of vertex indices, consistently wound.
    shape : optional analytic shape the mesh discretizes (set by
        :func:`make_shape`); enables closed-form curvature downstream.
    """

    def __init__(self, vertices, faces, shape: AnalyticShape | None = None):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(faces, dtype=np.int64)
        self.shape = shape
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be an (V, 3) array")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshError("faces must be an (F, 3) array")
        if len(self.faces) == 0:
            raise MeshError("mesh has no faces")
        if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
            bad = np.nonzero((self.faces < 0) | (self.faces >= len(self.vertices)))[0][0]
            raise MeshError(f"face {bad} references an out-of-range vertex")

        self._check_degenerate()
        self._check_closed()
        if self.signed_volume() < 0:
            self.faces = np.ascontiguousarray(self.faces[:, ::-1])
        self._compute_derived()

    # -- validation -------------------------------------------------------

    def _check_degenerate(self):
        v = self.vertices
        diag = float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))
        cross = np.cross(
            v[self.faces[:, 1]] - v[self.faces[:, 0]],
            v[self.faces[:, 2]] - v[self.faces[:, 0]],
        )
        areas = 0.5 * np.linalg.norm(cross, axis=1)
        floor = AREA_FLOOR_FACTOR * diag * diag
        if np.any(areas <= floor):
            bad = int(np.argmax(areas <= floor))
            raise MeshError(f"degenerate triangle at face {bad} (area {areas[bad]:.3e})")

    def _check_closed(self):
        edges = {}
        for f, (i, j, k) in enumerate(self.faces):
            for a, b in ((i, j), (j, k), (k, i)):
                key = (int(a), int(b))
                if key in edges:
                    raise MeshError(
                        f"edge {key} traversed twice in the same direction "
                        f"(faces {edges[key]} and {f}): inconsistent orientation"
                    )
                edges[key] = f
        for (a, b), f in edges.items():
            if (b, a) not in edges:
                raise MeshError(f"boundary edge {(a, b)} of face {f}: surface not closed")

    def _compute_derived(self):
        v = self.vertices
        self.v0 = np.ascontiguousarray(v[self.faces[:, 0]])
        self.v1 = np.ascontiguousarray(v[self.faces[:, 1]])
        self.v2 = np.ascontiguousarray(v[self.faces[:, 2]])
        cross = np.cross(self.v1 - self.v0, self.v2 - self.v0)
        norms = np.linalg.norm(cross, axis=1)
        self.face_areas = 0.5 * norms
        self.face_normals = cross / norms[:, None]
        self.face_centroids = np.ascontiguousarray((self.v0 + self.v1 + self.v2) / 3.0)
        e01 = np.linalg.norm(self.v1 - self.v0, axis=1)
        e12 = np.linalg.norm(self.v2 - self.v1, axis=1)
        e20 = np.linalg.norm(self.v0 - self.v2, axis=1)
        self.face_diameters = np.maximum(e01, np.maximum(e12, e20))

    # -- queries ----------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def total_area(self) -> float:
        return float(self.face_areas.sum())

    @property
    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def diameter(self) -> float:
        lo, hi = self.bbox
        return float(np.linalg.norm(hi - lo))

    @property
    def center(self) -> np.ndarray:
        lo, hi = self.bbox
        return 0.5 * (lo + hi)

    @property
    def vertex_normals(self) -> np.ndarray:
        """Outward unit normals at vertices (area-weighted face average)."""
        if not hasattr(self, "_vertex_normals"):
            acc = np.zeros((self.n_vertices, 3))
            weighted = self.face_normals * self.face_areas[:, None]
            for corner in range(3):
                np.add.at(acc, self.faces[:, corner], weighted)
            self._vertex_normals = acc / np.linalg.norm(acc, axis=1)[:, None]
        return self._vertex_normals

    def signed_volume(self) -> float:
        v = self.vertices
        return float(
            np.einsum(
                "ij,ij->i",
                v[self.faces[:, 0]],
                np.cross(v[self.faces[:, 1]], v[self.faces[:, 2]]),
            ).sum()
            / 6.0
        )

    def scaled(self, factor: float) -> "TriMesh":
        """Uniformly scaled copy about the origin."""
        shape = None
        if isinstance(self.shape, Ball):
            shape = Ball(self.shape.radius * factor)
        elif isinstance(self.shape, Ellipsoid):
            a, b, c = self.shape.semi_axes
            shape = Ellipsoid(a * factor, b * factor, c * factor)
        return TriMesh(self.vertices * factor, self.faces, shape=shape)


# -- file I/O ---------------------------------------------------------------


def load_mesh(path) -> TriMesh:
    """Read a triangle mesh from an OFF or OBJ file (triangles only)."""
    path = Path(path)
    if not path.exists():
        raise MeshError(f"mesh file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".off":
        vertices, faces = _parse_off(path)
    elif suffix == ".obj":
        vertices, faces = _parse_obj(path)
    else:
        raise MeshError(f"unsupported mesh format {suffix!r} (expected .off or .obj)")
    return TriMesh(vertices, faces)


def _parse_off(path: Path):
    tokens = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0].upper() != "OFF":
        raise MeshError(f"{path}: missing OFF header")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4  # skip edge count
        vertices = np.array(tokens[pos:pos + 3 * nv], dtype=np.float64).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for f in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise MeshError(f"{path}: non-triangular face {f} ({k} vertices)")
            faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
            pos += k + 1
    except (ValueError, IndexError) as exc:
        raise MeshError(f"{path}: OFF parse failure ({exc})") from exc
    return vertices, np.array(faces, dtype=np.int64)


def _parse_obj(path: Path):
    vertices, faces = [], []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                try:
                    vertices.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise MeshError(f"{path}:{ln}: bad vertex line") from exc
            elif parts[0] == "f":
                refs = parts[1:]
                if len(refs) != 3:
                    raise MeshError(
                        f"{path}:{ln}: non-triangular face ({len(refs)} vertices)"
                    )
                try:
                    faces.append([int(r.split("/")[0]) - 1 for r in refs])
                except ValueError as exc:
                    raise MeshError(f"{path}:{ln}: bad face line") from exc
    if not vertices or not faces:
        raise MeshError(f"{path}: no usable geometry found")
    return np.array(vertices, dtype=np.float64), np.array(faces, dtype=np.int64)


def save_off(path, vertices, faces) -> None:
    """Write vertices/faces as an OFF file (12 significant digits)."""
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(vertices)} {len(faces)} 0\n")
        for v in vertices:
            fh.write(f"{v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")
        for f in faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


# -- analytic shape meshing ---------------------------------------------------

MAX_REFINEMENT = 7

# Unit icosahedron (12 vertices, 20 faces), outward wound.
_PHI = (1.0 + math.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array(
    [
        (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
        (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
        (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
    ],
    dtype=np.float64,
)
_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ],
    dtype=np.int64,
)


def make_shape(shape: AnalyticShape, refinement: int) -> TriMesh:
    """Icosphere discretization of a ball or ellipsoid.

    Subdivides the icosahedron ``refinement`` times (20 * 4**refinement
    faces), maps the unit-sphere vertices onto the shape, and relaxes them
    tangentially (projected Laplacian smoothing) so triangle stars stay
    near-isotropic on stretched shapes; every vertex lies exactly on the
    surface.  Balls skip the relaxation, which they do not need.
    """
    if refinement < 0 or refinement > MAX_REFINEMENT:
        raise MeshError(f"refinement must be in [0, {MAX_REFINEMENT}], got {refinement}")
    verts = _ICO_VERTS / np.linalg.norm(_ICO_VERTS, axis=1)[:, None]
    faces = _ICO_FACES
    for _ in range(refinement):
        verts, faces = _subdivide_sphere(verts, faces)
    a, b, c = shape.semi_axes
    verts = verts * np.array([a, b, c])
    if not (a == b == c):  # the icosphere is already isotropic on a ball
        verts = _relax_on_shape(verts, faces, shape)
    return TriMesh(verts, faces, shape=shape)


def _relax_on_shape(verts, faces, shape, n_iter=20, omega=0.5):
    """Projected Laplacian smoothing: pull each vertex toward its neighbor
    average, then back onto the surface along the ray from the origin."""
    n = len(verts)
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    counts = np.bincount(edges[:, 0], minlength=n).astype(np.float64)
    for _ in range(n_iter):
        acc = np.zeros((n, 3))
        np.add.at(acc, edges[:, 0], verts[edges[:, 1]])
        target = acc / counts[:, None]
        verts = project_to_shape(shape, (1.0 - omega) * verts + omega * target)
    return verts


def _subdivide_sphere(verts, faces):
    verts = list(map(np.asarray, verts))
    cache: dict[tuple[int, int], int] = {}

    def midpoint(i, j):
        key = (i, j) if i < j else (j, i)
        idx = cache.get(key)
        if idx is None:
            m = verts[i] + verts[j]
            m /= np.linalg.norm(m)
            verts.append(m)
            idx = len(verts) - 1
            cache[key] = idx
        return idx

    new_faces = []
    for i, j, k in faces:
        ij, jk, ki = midpoint(i, j), midpoint(j, k), midpoint(k, i)
        new_faces.extend([(i, ij, ki), (ij, j, jk), (ki, jk, k), (ij, jk, ki)])
    return np.array(verts), np.array(new_faces, dtype=np.int64)


# -- mean curvature -----------------------------------------------------------


def shape_mean_curvature(shape: AnalyticShape, points) -> np.ndarray:
    """Sum of principal curvatures of the shape at on-surface points.

    Evaluates the divergence of the unit normal of the implicit surface
    F = x^2/a^2 + y^2/b^2 + z^2/c^2 - 1 in closed form; positive on convex
    bodies (2/R on a ball of radius R).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a, b, c = shape.semi_axes
    inv2 = np.array([1.0 / a**2, 1.0 / b**2, 1.0 / c**2])
    f_val = (pts**2 * inv2).sum(axis=1) - 1.0
    scale = max(a, b, c)
    if np.any(np.abs(f_val) > ON_SURFACE_TOL * scale):
        bad = int(np.argmax(np.abs(f_val)))
        raise DomainError(
            f"point {pts[bad]} is not on the shape surface (F = {f_val[bad]:.3e})"
        )
    w2 = (pts**2 * inv2**2).sum(axis=1)
    w = np.sqrt(w2)
    return inv2.sum() / w - (pts**2 * inv2**3).sum(axis=1) / (w2 * w)


def project_to_shape(shape: AnalyticShape, points) -> np.ndarray:
    """Radially project points onto the shape surface (ray from origin)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a, b, c = shape.semi_axes
    inv2 = np.array([1.0 / a**2, 1.0 / b**2, 1.0 / c**2])
    s = 1.0 / np.sqrt((pts**2 * inv2).sum(axis=1))
    return pts * s[:, None]


def vertex_mean_curvatures(mesh: TriMesh) -> np.ndarray:
    """Discrete mean curvature (trace convention) at every vertex.

    Cotangent-weighted curvature normal with mixed Voronoi vertex areas;
    triangles with an obtuse angle fall back to barycentric thirds.  The
    scalar is signed by the outward vertex normal, so convex regions are
    positive.
    """
    v = mesh.vertices
    f = mesh.faces
    nv = len(v)

    p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    # cot of the angle at each corner
    cots = np.empty((len(f), 3))
    for corner, (pa, pb, pc) in enumerate(((p0, p1, p2), (p1, p2, p0), (p2, p0, p1))):
        u_vec = pb - pa
        w_vec = pc - pa
        cross = np.linalg.norm(np.cross(u_vec, w_vec), axis=1)
        cots[:, corner] = np.einsum("ij,ij->i", u_vec, w_vec) / cross

    areas = mesh.face_areas
    obtuse = (cots < 0.0).any(axis=1)

    vertex_area = np.zeros(nv)
    # Voronoi contribution: at corner a, (|ab|^2 cot C + |ac|^2 cot B) / 8
    edge2 = np.stack(
        [
            np.einsum("ij,ij->i", p1 - p0, p1 - p0),
            np.einsum("ij,ij->i", p2 - p1, p2 - p1),
            np.einsum("ij,ij->i", p0 - p2, p0 - p2),
        ],
        axis=1,
    )  # squared lengths of edges (01, 12, 20)
    vor = np.empty((len(f), 3))
    vor[:, 0] = (edge2[:, 0] * cots[:, 2] + edge2[:, 2] * cots[:, 1]) / 8.0
    vor[:, 1] = (edge2[:, 0] * cots[:, 2] + edge2[:, 1] * cots[:, 0]) / 8.0
    vor[:, 2] = (edge2[:, 1] * cots[:, 0] + edge2[:, 2] * cots[:, 1]) / 8.0
    contrib = np.where(obtuse[:, None], (areas / 3.0)[:, None], vor)
    for corner in range(3):
        np.add.at(vertex_area, f[:, corner], contrib[:, corner])

    # curvature normal: K_i = sum over opposite edges of (cot a + cot b)(x_i - x_j)
    kvec = np.zeros((nv, 3))
    pairs = ((0, 1, 2), (1, 2, 0), (2, 0, 1))  # (i, j, opposite corner)
    for ci, cj, opp in pairs:
        w = cots[:, opp][:, None]
        np.add.at(kvec, f[:, ci], w * (v[f[:, ci]] - v[f[:, cj]]))
        np.add.at(kvec, f[:, cj], w * (v[f[:, cj]] - v[f[:, ci]]))
    kvec /= 2.0 * vertex_area[:, None]

    vnorm = np.zeros((nv, 3))
    weighted = mesh.face_normals * areas[:, None]
    for corner in range(3):
        np.add.at(vnorm, f[:, corner], weighted)
    sign = np.where(np.einsum("ij,ij->i", kvec, vnorm) >= 0.0, 1.0, -1.0)
    return sign * np.linalg.norm(kvec, axis=1)


def face_mean_curvatures(mesh: TriMesh) -> np.ndarray:
    """Per-face curvature: analytic at projected centroids when the mesh
    discretizes a known shape, otherwise the mean of the vertex estimates."""
    if mesh.shape is not None:
        pts = project_to_shape(mesh.shape, mesh.face_centroids)
        return shape_mean_curvature(mesh.shape, pts)
    hv = vertex_mean_curvatures(mesh)
    return hv[mesh.faces].mean(axis=1)


def mean_curvature(obj, where) -> float:
    """Mean curvature (sum of principal curvatures, 1/length).

    ``obj`` is an analytic shape with ``where`` a surface point, or a
    :class:`TriMesh` with ``where`` a vertex index.
    """
    if isinstance(obj, (Ball, Ellipsoid)):
        return float(shape_mean_curvature(obj, np.asarray(where, dtype=np.float64))[0])
    if isinstance(obj, TriMesh):
        return float(vertex_mean_curvatures(obj)[int(where)])
    raise TypeError(f"expected AnalyticShape or TriMesh, got {type(obj)!r}")
