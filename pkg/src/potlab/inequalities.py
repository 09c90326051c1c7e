"""Sharp geometric inequality checks between capacity, curvature and speed.

Every check produces :class:`InequalityReport` records with the inequality
oriented so that nonnegative slack means satisfied; the ball is the equality
case throughout and is flagged via a relative equality band.  Boundary
quadrature follows the t = 1 policy of :mod:`potlab.levelset`; curvature on
the boundary comes from the mesh module (analytic for generated shapes,
cotangent otherwise).

All functions are pure over immutable inputs and can run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .constants import UNIT_SPHERE_AREA
from .errors import DomainError
from .field import PotentialField
from .levelset import LevelSurface
from .mesh import TriMesh, face_mean_curvatures

REL_TOL = 0.01           # slack tolerance, relative to the report scale
EQUALITY_BAND = 0.01     # |slack| below this (relative) flags equality


@dataclass(frozen=True)
class InequalityReport:
    """One inequality instance: lhs <= rhs up to the stated tolerance."""

    name: str
    p: float | None
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    tolerance: float
    equality: bool
    context: dict = dataclass_field(default_factory=dict)


def _report(name: str, lhs: float, rhs: float, p: float | None = None,
            context: dict | None = None) -> InequalityReport:
    scale = max(abs(lhs), abs(rhs))
    tol = REL_TOL * scale
    slack = rhs - lhs
    return InequalityReport(
        name=name, p=p, lhs=lhs, rhs=rhs, slack=slack,
        satisfied=bool(slack >= -tol), tolerance=tol,
        equality=bool(abs(slack) <= EQUALITY_BAND * scale),
        context=dict(context or {}),
    )


def _curvature_quadrature(obj):
    """(areas, H, context) for a mesh or an extracted level surface."""
    if isinstance(obj, TriMesh):
        return obj.face_areas, face_mean_curvatures(obj), {
            "surface": "boundary", "faces": obj.n_faces,
        }
    if isinstance(obj, LevelSurface):
        h = obj.samples.H
        if np.any(~np.isfinite(h)):
            raise DomainError("curvature unavailable on part of the surface")
        return obj.areas, h, {"surface": f"level {obj.t:g}", "faces": len(obj)}
    raise TypeError(f"expected TriMesh or LevelSurface, got {type(obj)!r}")


def check_willmore(surface) -> InequalityReport:
    """4*pi <= integral of |H/2|^2 over any closed surface.

    Scale invariant; equality characterizes round spheres.
    """
    areas, h, ctx = _curvature_quadrature(surface)
    rhs = float(np.dot((np.abs(h) / 2.0) ** 2, areas))
    return _report("willmore", UNIT_SPHERE_AREA, rhs, p=None, context=ctx)


def surface_radius(mesh: TriMesh) -> float:
    """(|boundary| / 4*pi)^(1/2): the radius of the equal-area sphere."""
    return float(np.sqrt(mesh.total_area / UNIT_SPHERE_AREA))


def capacity_ratio(field: PotentialField) -> float:
    """Capacity over surface radius; 1 exactly on balls."""
    return field.capacity.value / surface_radius(field.mesh)


def check_cap_bounds(field: PotentialField, mesh: TriMesh, p: float,
                     q: float) -> list[InequalityReport]:
    """Capacity bounds from curvature moments of the boundary.

    Emits the L^p upper bound, its sup-norm limit, the capacity-curvature
    product lower bound, and the two-sided bracket on the capacity ratio
    (requires 1.5 <= p < 2 < q).
    """
    if p < 1.5:
        raise ValueError(f"curvature moment exponent p must be >= 1.5, got {p}")
    if not (p < 2.0 < q):
        raise ValueError(f"bracket needs p < 2 < q, got p={p}, q={q}")
    areas, h_face, _ = _curvature_quadrature(mesh)
    total = float(areas.sum())
    half_h = np.abs(h_face) / 2.0
    mean_p = float(np.dot(half_h**p, areas) / total) ** (1.0 / p)
    mean_q = float(np.dot(half_h**q, areas) / total) ** (1.0 / q)
    max_h = float(half_h.max())
    cap = field.capacity.value
    ratio = capacity_ratio(field)
    sradius = surface_radius(mesh)
    ctx = {"capacity": cap, "capacity_ratio": ratio, "surface_radius": sradius,
           "faces": mesh.n_faces}

    reports = [
        _report("cap-upper-moment", cap, total / UNIT_SPHERE_AREA * mean_p,
                p=p, context=ctx),
        _report("cap-upper-max", cap, total / UNIT_SPHERE_AREA * max_h,
                p=None, context=ctx),
        _report("cap-curvature-product", (UNIT_SPHERE_AREA / total) ** (1.0 / p),
                cap ** ((p - 2.0) / p) * mean_p, p=p, context=ctx),
    ]
    inv_sradius = 1.0 / sradius
    lower = (inv_sradius / mean_q) ** (q / (q - 2.0))
    upper = (mean_p / inv_sradius) ** (p / (2.0 - p))
    reports.append(_report("cap-bracket-lower", lower, ratio, p=q, context=ctx))
    reports.append(_report("cap-bracket-upper", ratio, upper, p=p, context=ctx))
    return reports


def check_lp_gradient(field: PotentialField, level: LevelSurface,
                      p: float) -> list[InequalityReport]:
    """Speed-moment bounds by curvature moments on one level surface.

    The log-speed |Du|/t is bounded by H/2 in every L^p sense; on the
    boundary level the same statements read as normal-derivative bounds,
    where the sup-norm version is additionally reported (evaluated both at a
    large stand-in exponent and as a direct maximum).
    """
    if p < 1.5:
        raise ValueError(f"exponent must be >= 1.5, got {p}")
    t = level.t
    areas = level.areas
    h = level.samples.H
    if np.any(~np.isfinite(h)):
        raise DomainError("curvature unavailable on part of the surface")
    log_speed = level.samples.speed / t
    half_h = np.abs(h) / 2.0
    ctx = {"t": t, "faces": len(level)}

    lhs_a = float(np.dot(log_speed**p, areas))
    rhs_a = float(np.dot(log_speed ** (p - 1.0) * half_h, areas))
    lhs_b = lhs_a ** (1.0 / p)
    rhs_b = float(np.dot(half_h**p, areas)) ** (1.0 / p)
    reports = [
        _report("gradient-moment-vs-curvature", lhs_a, rhs_a, p=p, context=ctx),
        _report("gradient-Lp-bound", lhs_b, rhs_b, p=p, context=ctx),
    ]
    if t == 1.0:
        reports.append(_report(
            "normal-derivative-Lp", lhs_b, rhs_b, p=p, context=ctx,
        ))
        reports.append(_report(
            "normal-derivative-max", float(level.samples.speed.max()),
            float(half_h.max()), p=None, context=ctx,
        ))
    return reports


@dataclass(frozen=True)
class OverdeterminedResidual:
    """Deviation of the boundary from the rotationally symmetric identity
    |Du| = H/2, normalized by the mean boundary speed."""

    sup: float
    l2: float
    mean_speed: float
    context: dict = dataclass_field(default_factory=dict)


def overdetermined_residual(field: PotentialField,
                            level: LevelSurface) -> OverdeterminedResidual:
    """Sup and area-weighted L2 norm of |Du| - H/2 on the boundary level."""
    if level.t != 1.0:
        raise ValueError("the residual is a boundary (t = 1) quantity")
    areas = level.areas
    total = float(areas.sum())
    speed = level.samples.speed
    residual = speed - level.samples.H / 2.0
    mean_speed = float(np.dot(speed, areas) / total)
    return OverdeterminedResidual(
        sup=float(np.abs(residual).max() / mean_speed),
        l2=float(np.sqrt(np.dot(residual**2, areas) / total) / mean_speed),
        mean_speed=mean_speed,
        context={"faces": len(level)},
    )


# -- serialization ------------------------------------------------------------


def report_to_dict(report: InequalityReport) -> dict:
    out = {
        "name": report.name,
        "p": report.p,
        "lhs": float(f"{report.lhs:.12g}"),
        "rhs": float(f"{report.rhs:.12g}"),
        "slack": float(f"{report.slack:.12g}"),
        "satisfied": report.satisfied,
        "tolerance": float(f"{report.tolerance:.12g}"),
        "equality": report.equality,
    }
    out.update({k: (float(f"{v:.12g}") if isinstance(v, float) else v)
                for k, v in report.context.items()})
    return out


def format_report_table(reports) -> str:
    lines = [f"{'name':<28} {'p':>5} {'lhs':>16} {'rhs':>16} "
             f"{'slack':>12} {'ok':>3} {'eq':>3}"]
    for r in reports:
        p_txt = f"{r.p:g}" if r.p is not None else "-"
        lines.append(
            f"{r.name:<28} {p_txt:>5} {r.lhs:>16.9g} {r.rhs:>16.9g} "
            f"{r.slack:>12.4g} {'y' if r.satisfied else 'N':>3} "
            f"{'y' if r.equality else '.':>3}"
        )
    return "\n".join(lines)
