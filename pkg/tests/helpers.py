"""Shared test utilities: reference values and independent mini-oracles."""

import math

import numpy as np

# Capacity of the 2:1:1 ellipsoid from the closed prolate form
# 2 e / log((a + e)/(a - e)), e = sqrt(a^2 - b^2); cross-checked in the
# oracle tests against the elliptic-integral route to 1e-14.
ELL_CAPACITY = 1.3151907222040506

# Surface area of the 2:1:1 ellipsoid, closed prolate form
# 2 pi b^2 (1 + (a / (b e)) asin(e)), e the eccentricity.
ELL_AREA = 21.478435327883737

# Integral of |H/2|^2 over the 2:1:1 ellipsoid (dense parametric quadrature;
# frozen from oracle.ellipsoid_surface_quadrature at n=512).
ELL_WILLMORE = 15.451622045

# Closed-form curvature values of the 2:1:1 ellipsoid (derived from the
# implicit divergence formula by hand: poles a/b^2 doubled, equator
# b/a^2 + 1/b).
ELL_H_POLE = 4.0
ELL_H_EQUATOR = 1.25


def exterior_shell_points(mesh, n, rng, lo=1.5, hi=3.0):
    """Random points in a spherical shell safely outside the body."""
    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    bound = np.linalg.norm(mesh.vertices, axis=1).max()
    radii = rng.uniform(lo * bound, hi * bound, size=n)
    return mesh.center[None, :] + directions * radii[:, None]


def make_torus(n_major=48, n_minor=24, R=2.0, r=0.7):
    """Closed torus mesh (regular parametric grid, outward oriented)."""
    iu, iv = np.meshgrid(np.arange(n_major), np.arange(n_minor), indexing="ij")
    theta = 2.0 * math.pi * iu / n_major
    phi = 2.0 * math.pi * iv / n_minor
    x = (R + r * np.cos(phi)) * np.cos(theta)
    y = (R + r * np.cos(phi)) * np.sin(theta)
    z = r * np.sin(phi)
    verts = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)

    def vid(i, j):
        return (i % n_major) * n_minor + (j % n_minor)

    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            faces.append((a, b, c))
            faces.append((a, c, d))
    return verts, np.array(faces, dtype=np.int64)


def torus_willmore(R=2.0, r=0.7, n=2048):
    """Dense quadrature of |H/2|^2 over the torus (closed-form H)."""
    phi = (np.arange(n) + 0.5) * 2.0 * math.pi / n
    # principal curvatures: 1/r and cos(phi)/(R + r cos(phi))
    h = 1.0 / r + np.cos(phi) / (R + r * np.cos(phi))
    area_density = (R + r * np.cos(phi)) * r  # per dtheta dphi
    val = np.sum((h / 2.0) ** 2 * area_density) * (2.0 * math.pi / n) * 2.0 * math.pi
    return float(val)
