"""Barycentric quadrature ladder for flat triangular panels.

A depth-``d`` rule splits the panel into ``4**d`` congruent children by edge
midpoint subdivision and places one node at each child centroid.  Children
of a planar triangle have equal area, so every node carries the uniform
weight ``area / n_nodes``.  The ladder serves the potential-only evaluation
path; gradient/Hessian evaluations use exact panel integrals instead.

The ladder is frozen into one flat array (nodes stacked depth after depth,
with an offset table) so that both the numba and the numpy kernels can index
it without any Python-object traffic.
"""

import numpy as np

_CORNERS = (
    np.array([1.0, 0.0, 0.0]),
    np.array([0.0, 1.0, 0.0]),
    np.array([0.0, 0.0, 1.0]),
)


def _children(tri):
    a, b, c = tri
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    return [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]


def _subdivided(depth):
    tris = [_CORNERS]
    for _ in range(depth):
        tris = [child for tri in tris for child in _children(tri)]
    return tris


def centroid_nodes(depth: int) -> np.ndarray:
    """Barycentric coordinates of the 4**depth child centroids."""
    return np.array([(a + b + c) / 3.0 for a, b, c in _subdivided(depth)])


def _ladder(depths):
    tables = [centroid_nodes(d) for d in depths]
    offsets = np.zeros(len(tables) + 1, dtype=np.int64)
    for i, table in enumerate(tables):
        offsets[i + 1] = offsets[i] + len(table)
    return np.ascontiguousarray(np.concatenate(tables)), offsets

# Rung selection by distance / panel-diameter ratio: the centroid rule beyond
# twice the panel diameter, one extra subdivision level per halving of the
# ratio, and the exact panel integral under half a diameter (depth -1).
POT_THRESHOLDS = np.array([2.0, 1.0, 0.5])
POT_NODES, POT_OFFSETS = _ladder(range(3))  # 1, 4, 16 nodes
