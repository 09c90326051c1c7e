"""Pure-numpy implementation of the hot panel kernels.

Same contracts as :mod:`potlab.backends.numba_kernels`; selected through the
``POTLAB_BACKEND`` environment variable.  Potential-only sums run through
dense chunked matrix arithmetic plus per-depth near pair lists; gradient and
Hessian sums use the exact constant-density panel integrals (edge log terms
plus a signed solid angle) for every pair.  Accumulation happens chunk by
chunk in a fixed order, so repeated runs are bit-identical.
"""

import numpy as np

from .subdivision import POT_NODES, POT_OFFSETS, POT_THRESHOLDS

FOUR_PI = 4.0 * np.pi

# Soft cap on (target, panel) pairs materialized per chunk.
_PAIR_BUDGET = 300_000


def _chunk_size(n_panels: int) -> int:
    return max(8, _PAIR_BUDGET // max(n_panels, 1))


def _dot(a, b):
    return np.einsum("...d,...d->...", a, b)


def self_potential_terms(v0, v1, v2, cen):
    """Exact single-layer self integrals: (1/4pi) * int_T |c - y|^-1 dA."""
    total = np.zeros(len(cen))
    for p, q in ((v0, v1), (v1, v2), (v2, v0)):
        pa, qa = p - cen, q - cen
        la = np.linalg.norm(pa, axis=1)
        lb = np.linalg.norm(qa, axis=1)
        le = np.linalg.norm(p - q, axis=1)
        two_area = np.linalg.norm(np.cross(pa, qa), axis=1)
        h = two_area / le
        total += h * np.log((la + lb + le) / (la + lb - le))
    return total / FOUR_PI


def _exact_panels(x, p0, p1, p2, nrm, order):
    """Exact panel integrals of the Newton kernel for paired arrays.

    ``x``: (P, 3) targets; ``p0, p1, p2, nrm``: (P, 3) panel data.  Returns
    the raw (not 1/4pi scaled) potential (P,), gradient (P, 3) and packed
    Hessian (P, 6) of the unit-density single layer on each panel.
    """
    n_pairs = len(x)
    z = _dot(x - p0, nrm)
    u = np.zeros(n_pairs)
    g = np.zeros((n_pairs, 3))
    h = np.zeros((n_pairs, 3, 3))
    grad_om = np.zeros((n_pairs, 3))
    for p, q in ((p0, p1), (p1, p2), (p2, p0)):
        edge = q - p
        ell = np.linalg.norm(edge, axis=1)
        t_hat = edge / ell[:, None]
        m_hat = np.cross(t_hat, nrm)
        xp = x - p
        r_m = np.linalg.norm(xp, axis=1)
        r_p = np.linalg.norm(x - q, axis=1)
        s = r_p + r_m
        log_term = np.log((s + ell) / np.maximum(s - ell, 1e-300))
        u += -_dot(m_hat, xp) * log_term
        g -= m_hat * log_term[:, None]
        if order >= 2:
            f = -2.0 * ell / np.maximum(s * s - ell * ell, 1e-300)
            d_log = f[:, None] * ((x - q) / r_p[:, None] + xp / r_m[:, None])
            h -= m_hat[:, :, None] * d_log[:, None, :]
            b_par = _dot(t_hat, xp)
            b_perp2 = np.maximum(r_m * r_m - b_par * b_par, 1e-300)
            c_e = ((ell - b_par) / r_p + b_par / r_m) / b_perp2
            grad_om -= c_e[:, None] * np.cross(t_hat, xp)
    r1, r2, r3 = p0 - x, p1 - x, p2 - x
    n1 = np.linalg.norm(r1, axis=1)
    n2 = np.linalg.norm(r2, axis=1)
    n3 = np.linalg.norm(r3, axis=1)
    triple = _dot(r1, np.cross(r2, r3))
    denom = (n1 * n2 * n3 + _dot(r1, r2) * n3 + _dot(r1, r3) * n2
             + _dot(r2, r3) * n1)
    omega = -2.0 * np.arctan2(triple, denom)  # signed: positive above the panel
    u -= z * omega
    g -= nrm * omega[:, None]
    hess6 = np.empty((n_pairs, 6))
    if order >= 2:
        h -= nrm[:, :, None] * grad_om[:, None, :]
        hess6[:, 0] = h[:, 0, 0]
        hess6[:, 1] = h[:, 1, 1]
        hess6[:, 2] = h[:, 2, 2]
        hess6[:, 3] = 0.5 * (h[:, 0, 1] + h[:, 1, 0])
        hess6[:, 4] = 0.5 * (h[:, 0, 2] + h[:, 2, 0])
        hess6[:, 5] = 0.5 * (h[:, 1, 2] + h[:, 2, 1])
    else:
        hess6[:] = 0.0
    return u, g, hess6


def assemble(v0, v1, v2, cen, areas, diams, normals):
    """Dense collocation matrix of panel potentials at panel centroids.

    Far entries (centroid distance >= 2 panel diameters) use the centroid
    rule, near off-diagonal entries the exact panel integral, diagonal
    entries the exact in-plane integral.
    """
    n = len(cen)
    a_mat = np.zeros((n, n))
    chunk = _chunk_size(n)
    for s in range(0, n, chunk):
        e = min(s + chunk, n)
        d = np.linalg.norm(cen[s:e][:, None, :] - cen[None, :, :], axis=2)
        far = d >= POT_THRESHOLDS[0] * diams[None, :]
        with np.errstate(divide="ignore"):
            block = np.where(far, areas[None, :] / (FOUR_PI * d), 0.0)
        pi, pj = np.nonzero(~far)
        keep = (pi + s) != pj
        pi, pj = pi[keep], pj[keep]
        if len(pi):
            u, _, _ = _exact_panels(cen[s + pi], v0[pj], v1[pj], v2[pj],
                                    normals[pj], order=0)
            block[pi, pj] = u / FOUR_PI
        a_mat[s:e] = block
    a_mat[np.arange(n), np.arange(n)] = self_potential_terms(v0, v1, v2, cen)
    return a_mat


def _depth_map(ratio):
    depth = np.zeros(ratio.shape, dtype=np.int8)
    for thr in POT_THRESHOLDS:
        depth += ratio < thr
    return depth


def _potential_only(targets, v0, v1, v2, cen, areas, diams, normals, weight, exclude):
    m, n = len(targets), len(cen)
    u = np.zeros(m)
    chunk = _chunk_size(n)
    n_depths = len(POT_OFFSETS) - 1
    for s in range(0, m, chunk):
        e = min(s + chunk, m)
        t = targets[s:e]
        d = np.linalg.norm(t[:, None, :] - cen[None, :, :], axis=2)
        depth = _depth_map(d / diams[None, :])
        if exclude is not None:
            rows = np.nonzero(exclude[s:e] >= 0)[0]
            depth[rows, exclude[s:e][rows]] = -1
        far = depth == 0
        with np.errstate(divide="ignore"):
            inv = np.where(far, 1.0 / d, 0.0)
        u[s:e] = inv @ weight
        for dep in range(1, n_depths):
            pi, pj = np.nonzero(depth == dep)
            if len(pi) == 0:
                continue
            nodes = POT_NODES[POT_OFFSETS[dep]:POT_OFFSETS[dep + 1]]
            y = np.einsum("kc,pcd->pkd", nodes,
                          np.stack((v0[pj], v1[pj], v2[pj]), axis=1))
            r = np.linalg.norm(t[pi][:, None, :] - y, axis=2)
            np.add.at(u, s + pi, weight[pj] / len(nodes) * np.sum(1.0 / r, axis=1))
        pi, pj = np.nonzero(depth == n_depths)  # exact tail
        if len(pi):
            ue, _, _ = _exact_panels(t[pi], v0[pj], v1[pj], v2[pj],
                                     normals[pj], order=0)
            np.add.at(u, s + pi, weight[pj] / areas[pj] * ue)
    return u


def eval_source(targets, v0, v1, v2, cen, areas, diams, normals, sigma, order,
                exclude):
    """Potential / gradient / Hessian of the weighted panel sum at targets.

    Returns ``(u, grad, hess)`` with the Hessian packed as
    ``(xx, yy, zz, xy, xz, yz)``; entries above ``order`` are left zero.
    ``exclude[i] = j`` drops panel ``j`` from target ``i`` (-1 keeps all).
    For ``order >= 1`` every pair is integrated exactly.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    m, n = len(targets), len(cen)
    weight = sigma * areas
    if order == 0:
        u = _potential_only(targets, v0, v1, v2, cen, areas, diams, normals,
                            weight / FOUR_PI, exclude)
        return u, np.zeros((m, 3)), np.zeros((m, 6))
    u = np.zeros(m)
    grad = np.zeros((m, 3))
    hess = np.zeros((m, 6))
    chunk = _chunk_size(n)
    cols = np.arange(n)
    for s in range(0, m, chunk):
        e = min(s + chunk, m)
        c = e - s
        x = np.repeat(targets[s:e], n, axis=0)
        pj = np.tile(cols, c)
        ue, ge, he = _exact_panels(x, v0[pj], v1[pj], v2[pj], normals[pj], order)
        w = np.tile(sigma / FOUR_PI, c)
        if exclude is not None:
            exc = exclude[s:e]
            rows = np.nonzero(exc >= 0)[0]
            w[rows * n + exc[rows]] = 0.0
        u[s:e] = (w * ue).reshape(c, n).sum(axis=1)
        grad[s:e] = (w[:, None] * ge).reshape(c, n, 3).sum(axis=1)
        if order >= 2:
            hess[s:e] = (w[:, None] * he).reshape(c, n, 6).sum(axis=1)
    return u, grad, hess


def boundary_gradient(v0, v1, v2, cen, areas, diams, normals, sigma):
    """One-sided exterior gradient of the potential at the panel centroids.

    Off-panel contributions are exact; the collocation panel contributes its
    exact in-plane edge terms plus the exterior-side solid-angle limit 2*pi.
    """
    n = len(cen)
    _, grad, _ = eval_source(cen, v0, v1, v2, cen, areas, diams, normals,
                             sigma, 1, np.arange(n, dtype=np.int64))
    # self contribution, z -> 0+ limit
    g_self = np.zeros((n, 3))
    for p, q in ((v0, v1), (v1, v2), (v2, v0)):
        edge = q - p
        ell = np.linalg.norm(edge, axis=1)
        t_hat = edge / ell[:, None]
        m_hat = np.cross(t_hat, normals)
        r_m = np.linalg.norm(cen - p, axis=1)
        r_p = np.linalg.norm(cen - q, axis=1)
        s = r_p + r_m
        log_term = np.log((s + ell) / (s - ell))
        g_self -= m_hat * log_term[:, None]
    g_self -= 2.0 * np.pi * normals
    return grad + sigma[:, None] * g_self / FOUR_PI


def ray_crossings(points, v0, v1, v2, direction, margin):
    """Count ray/triangle crossings from each point along ``direction``.

    Returns ``(counts, ambiguous)``; a crossing with |t| < margin or a
    near-degenerate intersection marks the point ambiguous (caller decides).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    m = len(points)
    counts = np.zeros(m, dtype=np.int64)
    ambiguous = np.zeros(m, dtype=bool)
    e1 = v1 - v0
    e2 = v2 - v0
    pvec = np.cross(direction, e2)
    det = np.einsum("nd,nd->n", e1, pvec)
    good = np.abs(det) > 1e-300
    inv_det = np.where(good, 1.0 / np.where(good, det, 1.0), 0.0)
    chunk = _chunk_size(len(v0))
    eps = 1e-12
    for s in range(0, m, chunk):
        e = min(s + chunk, m)
        tvec = points[s:e][:, None, :] - v0[None, :, :]
        a = np.einsum("cnd,nd->cn", tvec, pvec) * inv_det
        qvec = np.cross(tvec, e1[None, :, :])
        b = np.einsum("cnd,d->cn", qvec, direction) * inv_det
        t_hit = np.einsum("cnd,nd->cn", qvec, e2) * inv_det
        inside = good & (a >= -eps) & (b >= -eps) & (a + b <= 1.0 + eps)
        hit = inside & (t_hit > margin)
        counts[s:e] = np.sum(hit, axis=1)
        near_edge = inside & ((a < eps) | (b < eps) | (a + b > 1.0 - eps)) & (t_hit > margin)
        grazing = inside & (np.abs(t_hit) <= margin)
        ambiguous[s:e] = np.any(grazing | near_edge, axis=1)
    return counts, ambiguous
