"""Time the numba and numpy kernels on the same inputs.

    python3 benchmarks/bench_kernels.py --na 8 --repeat 5

Prints one line per (kernel, backend) with the best wall time, then the
speedup.  Results of the two backends are compared before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from entherm import _kernels
from entherm.hamiltonian import coupled_operator, enumerate_sector
from entherm.lattice import ClusterSpec, build_cluster, build_coupled_model


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up (JIT compile for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--na", type=int, default=8, help="sites per layer of the chain ladder")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    model = build_coupled_model(build_cluster(ClusterSpec("chain", args.na)), 1.0, 1.0, 1.0)
    op = coupled_operator(model)
    n = model.n_sites
    v = np.random.default_rng(0).standard_normal(len(enumerate_sector(n, n // 2)))

    results = {}
    for backend in _kernels.BACKENDS:
        if backend == "numba" and not _kernels.NUMBA_AVAILABLE:
            continue
        _kernels.set_backend(backend)
        basis = enumerate_sector(n, n // 2)
        results[backend] = {
            "enumerate": best_of(lambda: _kernels.enumerate_states(n, n // 2), args.repeat),
            "matvec": best_of(lambda: op.apply(basis, v), args.repeat),
            "_out": op.apply(basis, v),
        }
    if len(results) == 2:
        diff = np.max(np.abs(results["numba"]["_out"] - results["numpy"]["_out"]))
        print(f"N={n} sector dim {v.size}; max |numba - numpy| = {diff:.2e}")
    for kernel in ("enumerate", "matvec"):
        for backend, r in results.items():
            print(f"{kernel:10s} {backend:6s} {r[kernel] * 1e3:10.2f} ms")
        if len(results) == 2:
            print(f"{kernel:10s} speedup {results['numpy'][kernel] / results['numba'][kernel]:8.1f}x")


if __name__ == "__main__":
    main()
