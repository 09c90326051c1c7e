"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot paths (dense assembly, potential-only grid sums, exact
gradient/Hessian sums) on a mid-size body and prints the speedups.  Both
implementations are imported directly, so the POTLAB_BACKEND selection does
not matter here.

Run: python bench/benchmark_backends.py [--refine 3] [--targets 40000]
"""

import argparse
import time

import numpy as np

from potlab.backends import numba_kernels, numpy_kernels
from potlab.mesh import Ellipsoid, make_shape


def timed(fn, *args, repeat=3):
    best = np.inf
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--refine", type=int, default=3)
    parser.add_argument("--targets", type=int, default=40_000)
    args = parser.parse_args()

    mesh = make_shape(Ellipsoid(2.0, 1.0, 1.0), args.refine)
    panel_args = (mesh.v0, mesh.v1, mesh.v2, mesh.face_centroids,
                  mesh.face_areas, mesh.face_diameters, mesh.face_normals)
    sigma = np.full(mesh.n_faces, 1.0)
    rng = np.random.default_rng(0)
    targets = rng.normal(size=(args.targets, 3))
    targets *= (4.0 / np.linalg.norm(targets, axis=1)
                * rng.uniform(1.0, 3.0, size=args.targets))[:, None]
    samples = targets[: max(args.targets // 20, 100)]

    print(f"body: ellipsoid 2:1:1, {mesh.n_faces} panels; "
          f"{len(targets)} potential targets, {len(samples)} sample targets")

    # warm the jit cache outside the timings
    numba_kernels.assemble(*panel_args)
    numba_kernels.eval_source(targets[:64], *panel_args, sigma, 0, None)
    numba_kernels.eval_source(samples[:64], *panel_args, sigma, 2, None)

    rows = []
    for label, fn_nb, fn_np, call_args in (
        ("assembly", numba_kernels.assemble, numpy_kernels.assemble,
         panel_args),
        ("potential sums", numba_kernels.eval_source, numpy_kernels.eval_source,
         (targets, *panel_args, sigma, 0, None)),
        ("gradient+Hessian sums", numba_kernels.eval_source,
         numpy_kernels.eval_source, (samples, *panel_args, sigma, 2, None)),
    ):
        t_nb, r_nb = timed(fn_nb, *call_args)
        t_np, r_np = timed(fn_np, *call_args, repeat=1)
        first_nb = r_nb[0] if isinstance(r_nb, tuple) else r_nb
        first_np = r_np[0] if isinstance(r_np, tuple) else r_np
        agreement = float(np.abs(first_nb - first_np).max())
        rows.append((label, t_nb, t_np, agreement))

    print(f"\n{'kernel':<24} {'numba':>10} {'numpy':>10} {'speedup':>9} {'max |diff|':>12}")
    for label, t_nb, t_np, agreement in rows:
        print(f"{label:<24} {t_nb:>9.3f}s {t_np:>9.3f}s {t_np / t_nb:>8.1f}x "
              f"{agreement:>12.2e}")


if __name__ == "__main__":
    main()
