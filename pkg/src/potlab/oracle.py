"""Independent closed-form and quadrature oracles for tests and acceptance.

Nothing here touches the panel solver or the level-set machinery: capacity
comes from the classical one-dimensional elliptic integral, curvature from
numerical differentiation of the implicit unit normal, and surface integrals
from a dense parametric rule, so each oracle provides a genuinely
independent route to the quantity it checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import UNIT_SPHERE_AREA
from .errors import DomainError, PotlabError


@dataclass(frozen=True)
class OracleValue:
    quantity: str
    value: float
    method: str
    est_error: float

    def __post_init__(self):
        if not (math.isfinite(self.est_error) and self.est_error >= 0):
            raise PotlabError(f"oracle error estimate invalid: {self.est_error}")


def _adaptive_simpson(fn, a, b, rel_tol=1e-12, max_depth=48):
    """Adaptive Simpson with a recursion-local error budget."""

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, budget, depth):
        xm_l = 0.5 * (x0 + 0.5 * (x0 + x2))
        xm_r = 0.5 * (0.5 * (x0 + x2) + x2)
        fl, fr = fn(xm_l), fn(xm_r)
        x1 = 0.5 * (x0 + x2)
        left = simpson(x0, x1, f0, fl, f1)
        right = simpson(x1, x2, f1, fr, f2)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * budget:
            return left + right + delta / 15.0, abs(delta) / 15.0
        v_l, e_l = recurse(x0, x1, f0, fl, f1, left, budget / 2.0, depth + 1)
        v_r, e_r = recurse(x1, x2, f1, fr, f2, right, budget / 2.0, depth + 1)
        return v_l + v_r, e_l + e_r

    f0, f1, f2 = fn(a), fn(0.5 * (a + b)), fn(b)
    whole = simpson(a, b, f0, f1, f2)
    scale = abs(whole) if whole != 0.0 else 1.0
    value, err = recurse(a, b, f0, f1, f2, whole, rel_tol * scale, 0)
    if not math.isfinite(value):
        raise PotlabError("adaptive quadrature did not converge")
    return value, err


def ellipsoid_capacity(a: float, b: float, c: float) -> OracleValue:
    """Capacity of a triaxial ellipsoid from the elliptic integral.

    value = 2 / int_0^inf ds / sqrt((s+a^2)(s+b^2)(s+c^2)); the improper tail
    is mapped to a finite interval by s = m^2 tan(theta)^2 with m the largest
    semi-axis.  Normalization fixed by the ball case (capacity R).
    """
    if min(a, b, c) <= 0:
        raise DomainError("semi-axes must be positive")
    m = max(a, b, c)

    def integrand(theta):
        tan_t = math.tan(theta)
        s = (m * tan_t) ** 2
        ds = 2.0 * m * m * tan_t / math.cos(theta) ** 2
        return ds / math.sqrt((s + a * a) * (s + b * b) * (s + c * c))

    integral, err = _adaptive_simpson(integrand, 0.0, 0.5 * math.pi - 1e-14)
    value = 2.0 / integral
    return OracleValue(
        quantity="capacity",
        value=value,
        method=f"elliptic integral, tan substitution, adaptive Simpson "
               f"({a:g},{b:g},{c:g})",
        est_error=value * err / max(integral, 1e-300),
    )


def ball_Up(radius: float, p: float) -> OracleValue:
    """Level moment of a ball: 4*pi*R^p, independent of the level value."""
    if radius <= 0:
        raise DomainError("radius must be positive")
    if p < 0:
        raise DomainError("exponent must be nonnegative")
    return OracleValue(
        quantity="level-moment",
        value=UNIT_SPHERE_AREA * radius**p,
        method=f"closed form 4*pi*R^p (R={radius:g}, p={p:g})",
        est_error=4.0 * np.finfo(float).eps * UNIT_SPHERE_AREA * radius**p,
    )


def _implicit_normal(a, b, c, pts):
    inv2 = np.array([1.0 / a**2, 1.0 / b**2, 1.0 / c**2])
    grad = 2.0 * pts * inv2
    return grad / np.linalg.norm(grad, axis=-1, keepdims=True)


def ellipsoid_mean_curvature(a: float, b: float, c: float, point) -> OracleValue:
    """Sum of principal curvatures via numerical divergence of the normal.

    Central differences of the implicit-surface unit normal field, which is
    defined in a neighbourhood of the surface; independent of both the mesh
    estimates and the closed-form evaluation used by the shape module.
    """
    pt = np.asarray(point, dtype=np.float64)
    f_val = pt[0] ** 2 / a**2 + pt[1] ** 2 / b**2 + pt[2] ** 2 / c**2 - 1.0
    scale = max(a, b, c)
    if abs(f_val) > 1e-9 * scale:
        raise DomainError(f"point {pt} not on the ellipsoid (F = {f_val:.3e})")
    step = 1e-6 * scale
    div = 0.0
    for axis in range(3):
        offset = np.zeros(3)
        offset[axis] = step
        n_plus = _implicit_normal(a, b, c, pt + offset)
        n_minus = _implicit_normal(a, b, c, pt - offset)
        div += (n_plus[axis] - n_minus[axis]) / (2.0 * step)
    return OracleValue(
        quantity="mean-curvature",
        value=float(div),
        method="central differences of the implicit unit normal",
        est_error=abs(div) * 1e-8 + 1e-10 / scale,
    )


def ellipsoid_surface_quadrature(a: float, b: float, c: float, integrand,
                                 n: int = 512) -> OracleValue:
    """Dense parametric surface integral over the ellipsoid.

    Midpoint rule in the spherical parameters with the exact area element;
    ``integrand`` maps surface points (M, 3) to values (M,).  The error
    estimate comes from comparing against a half-resolution pass.
    """
    def compute(n_theta):
        theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
        phi = (np.arange(2 * n_theta) + 0.5) * 2.0 * math.pi / (2 * n_theta)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        st, ct = np.sin(tt), np.cos(tt)
        sp, cp = np.sin(pp), np.cos(pp)
        pts = np.stack((a * st * cp, b * st * sp, c * ct), axis=-1)
        # |S_theta x S_phi| for the spherical parametrization
        jac = st * np.sqrt(
            (b * c * st * cp) ** 2 + (a * c * st * sp) ** 2 + (a * b * ct) ** 2
        )
        vals = np.asarray(integrand(pts.reshape(-1, 3))).reshape(tt.shape)
        cell = (math.pi / n_theta) * (2.0 * math.pi / (2 * n_theta))
        return float(np.sum(vals * jac) * cell)

    coarse = compute(n // 2)
    fine = compute(n)
    return OracleValue(
        quantity="surface-integral",
        value=fine,
        method=f"parametric midpoint rule, {n}x{2*n} cells",
        est_error=abs(fine - coarse) + abs(fine) * 1e-12,
    )
