"""Monotone level-surface moments of the potential and their derivatives.

``U_p`` is the capacity-scaled p-th moment of the field speed over a level
surface; it is nondecreasing in the level value, constant exactly for
rotationally symmetric fields, and tends to ``capacity**p * 4*pi`` at small
levels.  ``Phi_p`` is the same moment in the conformally rescaled picture
(speed |Du|/u^2 against the rescaled area element u^2 dA); the two are
related by a pure capacity-power prefactor, which is checked to rounding in
the tests.  The derivative formulas are closed-form surface integrals of the
curvature defect H - 2|Du|/t and are validated against finite differences of
the moments themselves, not the other way around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import MIN_DERIVATIVE_P, UNIT_SPHERE_AREA
from .errors import ExtractionError
from .field import PotentialField
from .levelset import LevelSurface, boundary_level, extract_level, surface_integral

DEFAULT_T_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
LIMIT_TOL = 0.02  # relative slack on the lower-bound check U >= limit


def _scale_factor(field: PotentialField, t: float, p: float) -> float:
    return (field.capacity.value / t) ** (2.0 * (p - 1.0))


def compute_Up(field: PotentialField, level: LevelSurface, p: float) -> float:
    """Scaled speed moment [Cap/t]^(2(p-1)) * int |Du|^p dA over the level."""
    if p < 0:
        raise ValueError(f"moment exponent must be >= 0, got {p}")
    value = surface_integral(level, lambda s: s.speed**p)
    return _scale_factor(field, level.t, p) * value


def _bracket(samples, t: float) -> np.ndarray:
    return samples.H - 2.0 * samples.speed / t


def compute_Up_prime(field: PotentialField, level: LevelSurface, p: float) -> float:
    """Closed-form derivative of U_p in the level value.

    (p-1) [Cap/t]^(2(p-1)) * int |Du|^(p-1) (H - 2 |Du|/t) dA; near-critical
    samples replace |Du|^(p-1) H by the bounded form |Du|^(p-4) D2u(Du, Du).
    """
    if p < MIN_DERIVATIVE_P:
        raise ValueError(
            f"derivative formula needs p >= {MIN_DERIVATIVE_P}, got {p}"
        )
    t = level.t

    def integrand(s):
        return s.speed ** (p - 1.0) * _bracket(s, t)

    def surrogate(s):
        speed = s.speed
        with np.errstate(divide="ignore", invalid="ignore"):
            head = np.where(
                speed > 0.0, speed ** (p - 4.0) * s.hess_quad_form(), 0.0
            )
        return head - 2.0 * speed**p / t

    value = surface_integral(level, integrand, surrogate=surrogate)
    return (p - 1.0) * _scale_factor(field, t, p) * value


def derivative_scale(field: PotentialField, level: LevelSurface, p: float) -> float:
    """Positive-part scale of the derivative integrand.

    The derivative is a cancellation of two same-order terms (exactly zero on
    balls), so tolerances are taken relative to
    (p-1) [Cap/t]^(2(p-1)) * int |Du|^(p-1) (2 |Du|/t) dA.
    """
    t = level.t
    value = surface_integral(level, lambda s: s.speed**p * (2.0 / t))
    return abs(p - 1.0) * _scale_factor(field, t, p) * value


def compute_Phi(field: PotentialField, level: LevelSurface, p: float) -> float:
    """Conformal speed moment int (|Du|/t^2)^p t^2 dA over the level."""
    if p < 0:
        raise ValueError(f"moment exponent must be >= 0, got {p}")
    t = level.t
    return surface_integral(level, lambda s: (s.speed / t**2) ** p * t**2)


def compute_Phi_prime(field: PotentialField, level: LevelSurface, p: float) -> float:
    """Derivative of Phi_p in s = -log t: -(p-1) * int w^(p-1) H_conf dA_conf.

    Written out in Euclidean terms with the conformal curvature
    (H - 2 |Du|/t)/t; nonpositive for p >= 1.5, zero exactly on balls.
    """
    if p < MIN_DERIVATIVE_P:
        raise ValueError(
            f"derivative formula needs p >= {MIN_DERIVATIVE_P}, got {p}"
        )
    t = level.t

    def integrand(s):
        return (s.speed / t**2) ** (p - 1.0) * (_bracket(s, t) / t) * t**2

    def surrogate(s):
        speed = s.speed
        with np.errstate(divide="ignore", invalid="ignore"):
            head = np.where(
                speed > 0.0, speed ** (p - 4.0) * s.hess_quad_form(), 0.0
            )
        return (t**2) ** (1.0 - p) * (head - 2.0 * speed**p / t) * t

    value = surface_integral(level, integrand, surrogate=surrogate)
    return -(p - 1.0) * value


def limit_value(field: PotentialField, p: float) -> float:
    """Small-level limit of U_p: capacity^p * 4*pi."""
    return field.capacity.value**p * UNIT_SPHERE_AREA


@dataclass
class MonotoneProfile:
    """Tabulated moments over a level grid for one exponent."""

    p: float
    t_grid: np.ndarray
    U: np.ndarray
    U_prime: np.ndarray
    U_prime_fd: np.ndarray
    Phi: np.ndarray
    limit: float
    min_U_prime: float
    skipped_fraction: np.ndarray
    limit_ok: bool

    @property
    def s_grid(self) -> np.ndarray:
        return -np.log(self.t_grid)


def _central_differences(t: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Second-order finite differences on a non-uniform grid (NaN at ends)."""
    out = np.full(len(t), np.nan)
    for k in range(1, len(t) - 1):
        h1 = t[k] - t[k - 1]
        h2 = t[k + 1] - t[k]
        out[k] = (
            -h2 / (h1 * (h1 + h2)) * u[k - 1]
            + (h2 - h1) / (h1 * h2) * u[k]
            + h1 / (h2 * (h1 + h2)) * u[k + 1]
        )
    return out


def extract_levels(field: PotentialField, t_grid, resolution=None) -> list[LevelSurface]:
    """One level surface per grid value (t = 1 bypasses marching cubes)."""
    kwargs = {} if resolution is None else {"resolution": resolution}
    levels = []
    for t in t_grid:
        if t == 1.0:
            levels.append(boundary_level(field))
        else:
            levels.append(extract_level(field, float(t), **kwargs))
    return levels


def build_profiles(field: PotentialField, ps, t_grid=DEFAULT_T_GRID,
                   resolution=None, levels=None) -> dict[float, MonotoneProfile]:
    """Profiles for several exponents sharing one extraction per level."""
    t_arr = np.asarray(sorted(float(t) for t in t_grid))
    if len(t_arr) < 5:
        raise ExtractionError("level grid needs at least 5 points")
    if t_arr[0] <= 0.0 or t_arr[-1] > 1.0:
        raise ExtractionError("level grid must lie in (0, 1]")
    if levels is None:
        levels = extract_levels(field, t_arr, resolution)
    skipped = np.array([lv.skipped_fraction for lv in levels])
    profiles = {}
    for p in ps:
        p = float(p)
        u_vals = np.array([compute_Up(field, lv, p) for lv in levels])
        if p >= MIN_DERIVATIVE_P:
            u_prime = np.array([compute_Up_prime(field, lv, p) for lv in levels])
        elif p == 1.0:
            u_prime = np.zeros(len(levels))  # the (p-1) prefactor vanishes
        else:
            u_prime = np.full(len(levels), np.nan)
        phi = np.array([compute_Phi(field, lv, p) for lv in levels])
        lim = limit_value(field, p)
        profiles[p] = MonotoneProfile(
            p=p,
            t_grid=t_arr,
            U=u_vals,
            U_prime=u_prime,
            U_prime_fd=_central_differences(t_arr, u_vals),
            Phi=phi,
            limit=lim,
            min_U_prime=float(np.nanmin(u_prime)) if np.any(np.isfinite(u_prime))
            else math.nan,
            skipped_fraction=skipped,
            limit_ok=bool(np.all(u_vals >= lim * (1.0 - LIMIT_TOL))),
        )
    return profiles


def build_profile(field: PotentialField, p: float, t_grid=DEFAULT_T_GRID,
                  resolution=None, levels=None) -> MonotoneProfile:
    """Tabulate U_p, its derivative (formula and finite differences) and
    Phi_p over the level grid; checks the small-level lower bound."""
    return build_profiles(field, [p], t_grid, resolution, levels)[float(p)]


def write_profile_csv(profile: MonotoneProfile, path, header: str) -> None:
    """CSV with fixed column order; floats at 12 significant digits."""
    cols = zip(
        profile.t_grid, profile.s_grid, profile.U, profile.U_prime,
        profile.U_prime_fd, profile.Phi, profile.skipped_fraction,
    )
    with open(path, "w") as fh:
        fh.write(f"# {header}\n")
        fh.write("t,s,U,U_prime,U_prime_fd,Phi,skipped_fraction\n")
        for row in cols:
            fh.write(",".join(f"{x:.12g}" for x in row) + "\n")
