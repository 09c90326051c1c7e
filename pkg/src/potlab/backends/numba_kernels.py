"""Numba implementation of the hot panel kernels.

Loops are parallel over targets (or matrix rows) with a serial reduction
over panels inside each iteration, so results do not depend on the thread
count and repeated runs are bit-identical.  Gradients and Hessians come from
the exact constant-density panel integrals (edge log terms plus a signed
solid angle); the potential-only path uses the centroid-rule ladder with an
exact tail under half a panel diameter.
"""

import math

import numpy as np
from numba import njit, prange

from .subdivision import POT_NODES, POT_OFFSETS, POT_THRESHOLDS

FOUR_PI = 4.0 * np.pi
TWO_PI = 2.0 * np.pi


@njit(cache=True)
def _self_potential(v0, v1, v2, cx, cy, cz):
    """Exact in-plane integral of 1/r over a panel from its own centroid."""
    total = 0.0
    for e in range(3):
        if e == 0:
            p, q = v0, v1
        elif e == 1:
            p, q = v1, v2
        else:
            p, q = v2, v0
        pa0, pa1, pa2 = p[0] - cx, p[1] - cy, p[2] - cz
        qa0, qa1, qa2 = q[0] - cx, q[1] - cy, q[2] - cz
        la = math.sqrt(pa0 * pa0 + pa1 * pa1 + pa2 * pa2)
        lb = math.sqrt(qa0 * qa0 + qa1 * qa1 + qa2 * qa2)
        ex, ey, ez = q[0] - p[0], q[1] - p[1], q[2] - p[2]
        le = math.sqrt(ex * ex + ey * ey + ez * ez)
        ax = pa1 * qa2 - pa2 * qa1
        ay = pa2 * qa0 - pa0 * qa2
        az = pa0 * qa1 - pa1 * qa0
        two_area = math.sqrt(ax * ax + ay * ay + az * az)
        total += (two_area / le) * math.log((la + lb + le) / (la + lb - le))
    return total


@njit(cache=True)
def _self_potential_terms(v0, v1, v2, cen):
    n = cen.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = _self_potential(v0[i], v1[i], v2[i],
                                 cen[i, 0], cen[i, 1], cen[i, 2]) / FOUR_PI
    return out


def self_potential_terms(v0, v1, v2, cen):
    """Exact single-layer self integrals at the panel centroids."""
    return _self_potential_terms(v0, v1, v2, cen)


@njit(cache=True)
def _exact_panel(xx, xy, xz, p0, p1, p2, nx, ny, nz, order):
    """Exact (not 1/4pi scaled) potential, gradient and Hessian of the
    unit-density single layer on one panel.  Returns a 10-tuple
    (u, gx, gy, gz, hxx, hyy, hzz, hxy, hxz, hyz)."""
    z = (xx - p0[0]) * nx + (xy - p0[1]) * ny + (xz - p0[2]) * nz
    u = 0.0
    gx = gy = gz = 0.0
    h00 = h01 = h02 = h10 = h11 = h12 = h20 = h21 = h22 = 0.0
    go0 = go1 = go2 = 0.0
    for e in range(3):
        if e == 0:
            p, q = p0, p1
        elif e == 1:
            p, q = p1, p2
        else:
            p, q = p2, p0
        e0, e1, e2 = q[0] - p[0], q[1] - p[1], q[2] - p[2]
        ell = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
        t0, t1, t2 = e0 / ell, e1 / ell, e2 / ell
        m0 = t1 * nz - t2 * ny
        m1 = t2 * nx - t0 * nz
        m2 = t0 * ny - t1 * nx
        xp0, xp1, xp2 = xx - p[0], xy - p[1], xz - p[2]
        xq0, xq1, xq2 = xx - q[0], xy - q[1], xz - q[2]
        rm = math.sqrt(xp0 * xp0 + xp1 * xp1 + xp2 * xp2)
        rp = math.sqrt(xq0 * xq0 + xq1 * xq1 + xq2 * xq2)
        s = rp + rm
        denom_l = s - ell
        if denom_l < 1e-300:
            denom_l = 1e-300
        log_term = math.log((s + ell) / denom_l)
        u -= (m0 * xp0 + m1 * xp1 + m2 * xp2) * log_term
        gx -= m0 * log_term
        gy -= m1 * log_term
        gz -= m2 * log_term
        if order >= 2:
            den = s * s - ell * ell
            if den < 1e-300:
                den = 1e-300
            f = -2.0 * ell / den
            dl0 = f * (xq0 / rp + xp0 / rm)
            dl1 = f * (xq1 / rp + xp1 / rm)
            dl2 = f * (xq2 / rp + xp2 / rm)
            h00 -= m0 * dl0
            h01 -= m0 * dl1
            h02 -= m0 * dl2
            h10 -= m1 * dl0
            h11 -= m1 * dl1
            h12 -= m1 * dl2
            h20 -= m2 * dl0
            h21 -= m2 * dl1
            h22 -= m2 * dl2
            b_par = t0 * xp0 + t1 * xp1 + t2 * xp2
            b_perp2 = rm * rm - b_par * b_par
            if b_perp2 < 1e-300:
                b_perp2 = 1e-300
            c_e = ((ell - b_par) / rp + b_par / rm) / b_perp2
            cr0 = t1 * xp2 - t2 * xp1
            cr1 = t2 * xp0 - t0 * xp2
            cr2 = t0 * xp1 - t1 * xp0
            go0 -= c_e * cr0
            go1 -= c_e * cr1
            go2 -= c_e * cr2
    r10, r11, r12 = p0[0] - xx, p0[1] - xy, p0[2] - xz
    r20, r21, r22 = p1[0] - xx, p1[1] - xy, p1[2] - xz
    r30, r31, r32 = p2[0] - xx, p2[1] - xy, p2[2] - xz
    n1 = math.sqrt(r10 * r10 + r11 * r11 + r12 * r12)
    n2 = math.sqrt(r20 * r20 + r21 * r21 + r22 * r22)
    n3 = math.sqrt(r30 * r30 + r31 * r31 + r32 * r32)
    c230 = r21 * r32 - r22 * r31
    c231 = r22 * r30 - r20 * r32
    c232 = r20 * r31 - r21 * r30
    triple = r10 * c230 + r11 * c231 + r12 * c232
    d12 = r10 * r20 + r11 * r21 + r12 * r22
    d13 = r10 * r30 + r11 * r31 + r12 * r32
    d23 = r20 * r30 + r21 * r31 + r22 * r32
    denom = n1 * n2 * n3 + d12 * n3 + d13 * n2 + d23 * n1
    omega = -2.0 * math.atan2(triple, denom)
    u -= z * omega
    gx -= nx * omega
    gy -= ny * omega
    gz -= nz * omega
    if order >= 2:
        h00 -= nx * go0
        h01 -= nx * go1
        h02 -= nx * go2
        h10 -= ny * go0
        h11 -= ny * go1
        h12 -= ny * go2
        h20 -= nz * go0
        h21 -= nz * go1
        h22 -= nz * go2
    return (u, gx, gy, gz,
            h00, h11, h22,
            0.5 * (h01 + h10), 0.5 * (h02 + h20), 0.5 * (h12 + h21))


@njit(cache=True, parallel=True)
def _assemble(v0, v1, v2, cen, areas, diams, normals, diag, near_thresh):
    n = cen.shape[0]
    a_mat = np.empty((n, n))
    for i in prange(n):
        x0, x1, x2 = cen[i, 0], cen[i, 1], cen[i, 2]
        for j in range(n):
            if j == i:
                a_mat[i, j] = diag[i]
                continue
            dx, dy, dz = x0 - cen[j, 0], x1 - cen[j, 1], x2 - cen[j, 2]
            dist = math.sqrt(dx * dx + dy * dy + dz * dz)
            if dist >= near_thresh * diams[j]:
                a_mat[i, j] = areas[j] / (FOUR_PI * dist)
            else:
                res = _exact_panel(x0, x1, x2, v0[j], v1[j], v2[j],
                                   normals[j, 0], normals[j, 1], normals[j, 2], 0)
                a_mat[i, j] = res[0] / FOUR_PI
    return a_mat


def assemble(v0, v1, v2, cen, areas, diams, normals):
    """Dense collocation matrix of panel potentials at panel centroids."""
    diag = _self_potential_terms(v0, v1, v2, cen)
    return _assemble(v0, v1, v2, cen, areas, diams, normals, diag,
                     POT_THRESHOLDS[0])


@njit(cache=True, parallel=True, fastmath=True)
def _potential_far(targets, cen, weight):
    """Plain centroid-rule sum; valid when every panel is far."""
    m = targets.shape[0]
    n = cen.shape[0]
    u = np.empty(m)
    for i in prange(m):
        x0, x1, x2 = targets[i, 0], targets[i, 1], targets[i, 2]
        acc = 0.0
        for j in range(n):
            dx, dy, dz = x0 - cen[j, 0], x1 - cen[j, 1], x2 - cen[j, 2]
            acc += weight[j] / math.sqrt(dx * dx + dy * dy + dz * dz)
        u[i] = acc
    return u


@njit(cache=True, parallel=True)
def _eval_potential(targets, v0, v1, v2, cen, areas, diams, normals, weight,
                    exclude, nodes, offsets, thresholds):
    m = targets.shape[0]
    n = cen.shape[0]
    n_depths = offsets.shape[0] - 1
    u = np.zeros(m)
    for i in prange(m):
        x0, x1, x2 = targets[i, 0], targets[i, 1], targets[i, 2]
        skip = exclude[i]
        acc = 0.0
        for j in range(n):
            if j == skip:
                continue
            dx, dy, dz = x0 - cen[j, 0], x1 - cen[j, 1], x2 - cen[j, 2]
            dist = math.sqrt(dx * dx + dy * dy + dz * dz)
            ratio = dist / diams[j]
            dep = 0
            for k in range(thresholds.shape[0]):
                if ratio < thresholds[k]:
                    dep += 1
            if dep == n_depths:  # exact tail
                res = _exact_panel(x0, x1, x2, v0[j], v1[j], v2[j],
                                   normals[j, 0], normals[j, 1], normals[j, 2], 0)
                acc += weight[j] / areas[j] * res[0]
                continue
            k0, k1 = offsets[dep], offsets[dep + 1]
            w = weight[j] / (k1 - k0)
            part = 0.0
            for k in range(k0, k1):
                b0, b1, b2 = nodes[k, 0], nodes[k, 1], nodes[k, 2]
                y0 = b0 * v0[j, 0] + b1 * v1[j, 0] + b2 * v2[j, 0]
                y1 = b0 * v0[j, 1] + b1 * v1[j, 1] + b2 * v2[j, 1]
                y2 = b0 * v0[j, 2] + b1 * v1[j, 2] + b2 * v2[j, 2]
                rx, ry, rz = x0 - y0, x1 - y1, x2 - y2
                part += 1.0 / math.sqrt(rx * rx + ry * ry + rz * rz)
            acc += w * part
        u[i] = acc
    return u


@njit(cache=True, parallel=True)
def _eval_exact(targets, v0, v1, v2, normals, sigma, order, exclude):
    m = targets.shape[0]
    n = v0.shape[0]
    u = np.zeros(m)
    grad = np.zeros((m, 3))
    hess = np.zeros((m, 6))
    for i in prange(m):
        x0, x1, x2 = targets[i, 0], targets[i, 1], targets[i, 2]
        skip = exclude[i]
        ui = 0.0
        g0 = g1 = g2 = 0.0
        hxx = hyy = hzz = hxy = hxz = hyz = 0.0
        for j in range(n):
            if j == skip:
                continue
            res = _exact_panel(x0, x1, x2, v0[j], v1[j], v2[j],
                               normals[j, 0], normals[j, 1], normals[j, 2], order)
            w = sigma[j]
            ui += w * res[0]
            g0 += w * res[1]
            g1 += w * res[2]
            g2 += w * res[3]
            if order >= 2:
                hxx += w * res[4]
                hyy += w * res[5]
                hzz += w * res[6]
                hxy += w * res[7]
                hxz += w * res[8]
                hyz += w * res[9]
        u[i] = ui / FOUR_PI
        grad[i, 0] = g0 / FOUR_PI
        grad[i, 1] = g1 / FOUR_PI
        grad[i, 2] = g2 / FOUR_PI
        hess[i, 0] = hxx / FOUR_PI
        hess[i, 1] = hyy / FOUR_PI
        hess[i, 2] = hzz / FOUR_PI
        hess[i, 3] = hxy / FOUR_PI
        hess[i, 4] = hxz / FOUR_PI
        hess[i, 5] = hyz / FOUR_PI
    return u, grad, hess


def eval_source(targets, v0, v1, v2, cen, areas, diams, normals, sigma, order,
                exclude):
    """Potential / gradient / Hessian of the weighted panel sum at targets."""
    targets = np.ascontiguousarray(np.atleast_2d(np.asarray(targets, dtype=np.float64)))
    m = len(targets)
    if exclude is None:
        exclude = np.full(m, -1, dtype=np.int64)
    exclude = np.asarray(exclude, dtype=np.int64)
    if order == 0:
        weight = sigma * areas / FOUR_PI
        # Targets provably farther than the near-field threshold from every
        # panel take the branch-free centroid-rule kernel; the rest (a thin
        # shell around the body) go through the subdivision ladder.
        center = np.array([cen[:, 0].mean(), cen[:, 1].mean(), cen[:, 2].mean()])
        radii = np.linalg.norm(cen - center[None, :], axis=1)
        margin = POT_THRESHOLDS[0] * diams
        lo, hi = np.min(radii - margin), np.max(radii + margin)
        t_radii = np.linalg.norm(targets - center[None, :], axis=1)
        fast = ((t_radii < lo) | (t_radii > hi)) & (exclude < 0)
        u = np.empty(m)
        if np.any(fast):
            u[fast] = _potential_far(np.ascontiguousarray(targets[fast]), cen,
                                     weight)
        if not np.all(fast):
            slow = ~fast
            u[slow] = _eval_potential(
                np.ascontiguousarray(targets[slow]), v0, v1, v2, cen, areas,
                diams, normals, weight, np.ascontiguousarray(exclude[slow]),
                POT_NODES, POT_OFFSETS, POT_THRESHOLDS,
            )
        return u, np.zeros((m, 3)), np.zeros((m, 6))
    return _eval_exact(targets, v0, v1, v2, normals, sigma, order, exclude)


@njit(cache=True, parallel=True)
def _boundary_gradient(v0, v1, v2, cen, normals, sigma):
    n = cen.shape[0]
    grad = np.empty((n, 3))
    for i in prange(n):
        x0, x1, x2 = cen[i, 0], cen[i, 1], cen[i, 2]
        g0 = g1 = g2 = 0.0
        for j in range(n):
            if j == i:
                continue
            res = _exact_panel(x0, x1, x2, v0[j], v1[j], v2[j],
                               normals[j, 0], normals[j, 1], normals[j, 2], 1)
            g0 += sigma[j] * res[1]
            g1 += sigma[j] * res[2]
            g2 += sigma[j] * res[3]
        # collocation panel: exact in-plane edge terms, solid angle -> 2*pi
        s0 = s1 = s2 = 0.0
        for e in range(3):
            if e == 0:
                p, q = v0[i], v1[i]
            elif e == 1:
                p, q = v1[i], v2[i]
            else:
                p, q = v2[i], v0[i]
            e0, e1, e2 = q[0] - p[0], q[1] - p[1], q[2] - p[2]
            ell = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
            t0, t1, t2 = e0 / ell, e1 / ell, e2 / ell
            m0 = t1 * normals[i, 2] - t2 * normals[i, 1]
            m1 = t2 * normals[i, 0] - t0 * normals[i, 2]
            m2 = t0 * normals[i, 1] - t1 * normals[i, 0]
            xp0, xp1, xp2 = x0 - p[0], x1 - p[1], x2 - p[2]
            xq0, xq1, xq2 = x0 - q[0], x1 - q[1], x2 - q[2]
            rm = math.sqrt(xp0 * xp0 + xp1 * xp1 + xp2 * xp2)
            rp = math.sqrt(xq0 * xq0 + xq1 * xq1 + xq2 * xq2)
            s = rp + rm
            log_term = math.log((s + ell) / (s - ell))
            s0 -= m0 * log_term
            s1 -= m1 * log_term
            s2 -= m2 * log_term
        g0 += sigma[i] * (s0 - TWO_PI * normals[i, 0])
        g1 += sigma[i] * (s1 - TWO_PI * normals[i, 1])
        g2 += sigma[i] * (s2 - TWO_PI * normals[i, 2])
        grad[i, 0] = g0 / FOUR_PI
        grad[i, 1] = g1 / FOUR_PI
        grad[i, 2] = g2 / FOUR_PI
    return grad


def boundary_gradient(v0, v1, v2, cen, areas, diams, normals, sigma):
    """One-sided exterior gradient of the potential at the panel centroids."""
    return _boundary_gradient(v0, v1, v2, cen, normals, sigma)


@njit(cache=True, parallel=True)
def _ray_crossings(points, v0, v1, v2, direction, margin):
    m = points.shape[0]
    n = v0.shape[0]
    counts = np.zeros(m, dtype=np.int64)
    ambiguous = np.zeros(m, dtype=np.bool_)
    eps = 1e-12
    for i in prange(m):
        px, py, pz = points[i, 0], points[i, 1], points[i, 2]
        cnt = 0
        amb = False
        for j in range(n):
            e1x, e1y, e1z = v1[j, 0] - v0[j, 0], v1[j, 1] - v0[j, 1], v1[j, 2] - v0[j, 2]
            e2x, e2y, e2z = v2[j, 0] - v0[j, 0], v2[j, 1] - v0[j, 1], v2[j, 2] - v0[j, 2]
            hx = direction[1] * e2z - direction[2] * e2y
            hy = direction[2] * e2x - direction[0] * e2z
            hz = direction[0] * e2y - direction[1] * e2x
            det = e1x * hx + e1y * hy + e1z * hz
            if abs(det) < 1e-300:
                continue
            inv_det = 1.0 / det
            tx, ty, tz = px - v0[j, 0], py - v0[j, 1], pz - v0[j, 2]
            a = (tx * hx + ty * hy + tz * hz) * inv_det
            qx = ty * e1z - tz * e1y
            qy = tz * e1x - tx * e1z
            qz = tx * e1y - ty * e1x
            b = (direction[0] * qx + direction[1] * qy + direction[2] * qz) * inv_det
            if a < -eps or b < -eps or a + b > 1.0 + eps:
                continue
            t_hit = (e2x * qx + e2y * qy + e2z * qz) * inv_det
            if abs(t_hit) <= margin:
                amb = True
            if t_hit > margin:
                cnt += 1
                if a < eps or b < eps or a + b > 1.0 - eps:
                    amb = True
        counts[i] = cnt
        ambiguous[i] = amb
    return counts, ambiguous


def ray_crossings(points, v0, v1, v2, direction, margin):
    """Count ray/triangle crossings from each point along ``direction``."""
    points = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
    return _ray_crossings(points, v0, v1, v2,
                          np.asarray(direction, dtype=np.float64), float(margin))
