#!/usr/bin/env python3
"""Benchmark the hot deformation kernels: numba backend vs numpy fallback.

Times the inverse-map fixed point, the Lagrange gather and an end-to-end
push_forward on representative 1D and 2D workloads. Run:

    python3 benchmarks/bench_kernels.py [--repeats 5]

The backend used by the package itself is picked by NQG_KERNELS (auto
prefers numba); this script imports both implementations explicitly.
"""

import argparse
import time

import numpy as np

from nqglab.diffeo import HoleDiffeomorphism
from nqglab.kernels import _numba, _numpy
from nqglab.lattice import Grid, gaussian_packet


def _time(fn, repeats):
    fn()  # warm-up (includes jit compilation for the numba backend)
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _workloads():
    rng = np.random.default_rng(42)

    g1 = Grid(1, 16384, 48.0)
    psi1 = gaussian_packet(g1, [0.0], 0.5)
    d1 = HoleDiffeomorphism((0.0,), 18.0, (4.0,))

    g2 = Grid(2, 256, 30.0)
    psi2 = gaussian_packet(g2, [0.0, 0.0], 1.2)
    d2 = HoleDiffeomorphism((0.0, 0.0), 9.0, (1.5, -0.8))

    jobs = []
    for label, grid, psi, d in (("1d n=16384", g1, psi1, d1), ("2d 256^2", g2, psi2, d2)):
        pts = grid.points()
        center = np.asarray(d.center)
        amp = np.asarray(d.amplitude)
        queries = pts + rng.uniform(-0.3, 0.3, size=pts.shape) * grid.spacing
        for name, impl in (("numpy", _numpy), ("numba", _numba)):
            jobs.append(
                (
                    f"invert  {label}",
                    name,
                    lambda impl=impl, pts=pts, c=center, a=amp, d=d: impl.invert_displacement(
                        pts, c, d.radius, a, 1e-13, 100
                    ),
                )
            )
            jobs.append(
                (
                    f"interp  {label}",
                    name,
                    lambda impl=impl, psi=psi, q=queries, grid=grid: impl.interp_periodic(
                        psi.amplitudes, q, -0.5 * grid.length, grid.spacing
                    ),
                )
            )
    return jobs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    results = {}
    for label, backend, fn in _workloads():
        results.setdefault(label, {})[backend] = _time(fn, args.repeats)

    width = max(len(k) for k in results)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for label, times in results.items():
        ratio = times["numpy"] / times["numba"]
        print(
            f"{label:<{width}}  {times['numpy'] * 1e3:>8.2f}ms  "
            f"{times['numba'] * 1e3:>8.2f}ms  {ratio:>7.1f}x"
        )


if __name__ == "__main__":
    main()
