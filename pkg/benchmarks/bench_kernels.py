"""Benchmark the multi-ideal closure kernels: numba @njit vs pure numpy.

The closure is the inner loop of every tensor-lattice build. Two timings:

* kernel-level: close every single-tuple and every two-tuple seed on a
  fixed grid, once per backend, in process
* end-to-end: build a batch of tensor lattices in a subprocess with
  MORITA_PURE_NUMPY toggled, so module-level backend selection is honest

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from morita._kernels import backends, close_ideal
from morita.lattice import chain, diamond, m3
from morita.tensor import _Grid

CASES = [
    ("diamond (x) diamond", (diamond(), diamond())),
    ("4-chain (x) 4-chain", (chain(4), chain(4))),
    ("3-chain (x) 3-chain (x) 3-chain", (chain(3), chain(3), chain(3))),
    ("m3 (x) m3", (m3(), m3())),
]

END_TO_END = (
    "import time\n"
    "from morita.lattice import chain, diamond, m3\n"
    "from morita.tensor import tensor_product\n"
    "from morita import _kernels\n"
    "batch = [(diamond(), diamond()), (chain(4), chain(4)),\n"
    "         (chain(3), chain(3), chain(3)), (m3(), m3()),\n"
    "         (chain(5), chain(5)), (diamond(), m3())]\n"
    "for f in batch: tensor_product(*f)  # warm the JIT outside the clock\n"
    "t0 = time.perf_counter()\n"
    "for _ in range(5):\n"
    "    for f in batch: tensor_product(*f)\n"
    "print(_kernels.ACTIVE, time.perf_counter() - t0)\n")


def closure_workload(grid, backend):
    'Close every 1-seed and every 2-seed, like a full join-table build.'
    for t in range(grid.tcount):
        dmask = grid.bottom_mask.copy()
        dmask[t] = True
        close_ideal(dmask, grid.below, grid.flat_idxs, grid.joins,
                    backend=backend)
    for t1 in range(grid.tcount):
        for t2 in range(t1 + 1, grid.tcount):
            dmask = grid.bottom_mask.copy()
            dmask[t1] = dmask[t2] = True
            close_ideal(dmask, grid.below, grid.flat_idxs, grid.joins,
                        backend=backend)


def bench_kernels(repeats):
    names = list(backends())
    if "numba" not in names:
        print("numba backend unavailable, timing numpy only")
    print(f"{'case':34} {'tuples':>6} " +
          " ".join(f"{n + ' ms':>10}" for n in names))
    for label, factors in CASES:
        grid = _Grid(factors)
        closure_workload(grid, names[-1])  # JIT warmup
        row = []
        for name in names:
            best = min(
                _timed(closure_workload, grid, name) for _ in range(repeats))
            row.append(best * 1e3)
        print(f"{label:34} {grid.tcount:>6} " +
              " ".join(f"{ms:>10.2f}" for ms in row))


def _timed(fn, *args):
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


def bench_end_to_end():
    print("\nend-to-end tensor builds (5 x 6 lattices, subprocess):")
    for flag in ("0", "1"):
        env = dict(os.environ, MORITA_PURE_NUMPY=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END],
                             capture_output=True, text=True, env=env,
                             check=True).stdout.split()
        print(f"  backend {out[0]:>6}: {float(out[1]):.3f} s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    bench_kernels(args.repeats)
    bench_end_to_end()
