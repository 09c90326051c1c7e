"""Kernel backend selection.

The hot kernels (panel quadrature sums, dense assembly, ray parity tests)
exist twice: a numba-jitted implementation and a pure-numpy fallback with
identical contracts.  ``POTLAB_BACKEND=numpy`` or ``POTLAB_BACKEND=numba``
forces a choice; by default numba is used when importable.  The active module
is exposed as :data:`kernels`, the resolved name as :data:`BACKEND`.

``POTLAB_THREADS`` caps the worker threads of the numba backend.
"""

import os

_requested = os.environ.get("POTLAB_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(
        f"POTLAB_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import numpy_kernels as kernels
    BACKEND = "numpy"
else:
    try:
        from . import numba_kernels as kernels
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_kernels as kernels
        BACKEND = "numpy"

if BACKEND == "numba":
    _threads = os.environ.get("POTLAB_THREADS", "").strip()
    if _threads:
        import numba

        numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))

assemble = kernels.assemble
eval_source = kernels.eval_source
boundary_gradient = kernels.boundary_gradient
ray_crossings = kernels.ray_crossings
self_potential_terms = kernels.self_potential_terms
