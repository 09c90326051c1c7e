"""Ambient-dimension constants, written out once so formulas stay legible.

Everything downstream is specialized to three dimensions, but the constants
below are named after their role rather than their value so that every
exponent and prefactor in the level-set formulas can be traced.
"""

import math

# Ambient space dimension.  The solver, the level-set machinery and every
# inequality below are instantiated for dimension 3 only.
AMBIENT_DIM = 3

# Decay power of the potential: u ~ capacity * |x|**(-DECAY_POW) far away.
DECAY_POW = AMBIENT_DIM - 2  # = 1

# Exponent coupling the Euclidean and conformal pictures:
# the conformal speed is |Du| / u**CONFORMAL_EXP.
CONFORMAL_EXP = (AMBIENT_DIM - 1) / (AMBIENT_DIM - 2)  # = 2.0

# Surface measure of the unit sphere S^(AMBIENT_DIM-1).
UNIT_SPHERE_AREA = 4.0 * math.pi

# Mean curvature here is the trace of the second fundamental form; the
# "normalized" curvature appearing in the inequality suite is H / CURV_NORM.
CURV_NORM = AMBIENT_DIM - 1  # = 2

# Smallest exponent for which the level-moment derivative formula applies.
MIN_DERIVATIVE_P = 2.0 - 1.0 / (AMBIENT_DIM - 1)  # = 1.5
