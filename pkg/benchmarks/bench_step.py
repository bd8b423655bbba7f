"""Benchmark the compiled stepping core against the pure-NumPy fallback.

Run:  python3 benchmarks/bench_step.py [nsteps]
"""

import sys
import time

import numpy as np

from kswave import available_backends
from kswave.core import Field, grid_make
from kswave.elliptic import NEUMANN, solve_v


def bench(nsteps: int = 5000, n: int = 801, chi: float = 5.0, d: float = 1.0):
    grid = grid_make(0.0, 160.0, n)
    x = grid.nodes
    u = np.exp(-2.0 * np.maximum(x - 10.0, 0.0) ** 2 / 5.0)
    v = solve_v(Field(grid, u), d, NEUMANN).values
    dt = grid.dx ** 2 / 10.0

    backends = available_backends()
    results = {}
    print(f"{n} nodes, {nsteps} steps, chi={chi:g}, d={d:g}")
    for name, mod in sorted(backends.items()):
        # warm up, then measure
        mod.advance(u, v, 10, grid.dx, dt, chi, d, True, True)
        t0 = time.perf_counter()
        uo, vo = mod.advance(u, v, nsteps, grid.dx, dt, chi, d, True, True)
        elapsed = time.perf_counter() - t0
        results[name] = (elapsed, uo)
        rate = nsteps / elapsed
        print(f"  {name:>9}: {elapsed:8.3f} s   ({rate:,.0f} steps/s)")

    if len(results) == 2:
        (ta, ua), (tb, ub) = results["compiled"], results["python"]
        print(f"  speedup: {tb / ta:.1f}x")
        print(f"  max |u_compiled - u_python| = {np.max(np.abs(ua - ub)):.3e}")


if __name__ == "__main__":
    bench(int(sys.argv[1]) if len(sys.argv) > 1 else 5000)
