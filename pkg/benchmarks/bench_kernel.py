"""Benchmark the compiled monodromy kernel against the pure-Python fallback.

Run:  python benchmarks/bench_kernel.py [--quick]

Workloads mirror the two hot paths: order-2 real propagation (band and
criterion scans) and order-0 complex propagation (2-D spectrum grids).  The
fallback runs a size-reduced copy of each workload and the timing is scaled,
so the script stays fast even without the extension built.
"""

import argparse
import time

import numpy as np

from kghopf import kernel
from kghopf.kernel import pyfallback
from kghopf.waveform import HillCoefficient


def make_coefficient():
    T = 2.1
    return HillCoefficient.from_callable(
        lambda z: 0.55 + 0.35 * np.sin(2 * np.pi * z / T)
        + 0.08 * np.cos(4 * np.pi * z / T), T, n=1024)


def run(fn, coef, nus, order):
    t0 = time.perf_counter()
    out, steps = fn(coef.coeffs, coef.h_cell, coef.T, nus, order,
                    1e-11, 1e-13)
    dt = time.perf_counter() - t0
    assert np.all(steps >= 0)
    return dt, out


def bench(name, nus, order, n_fallback):
    coef = make_coefficient()
    t_compiled = None
    if kernel.BACKEND == "cython":
        t_compiled, out_c = run(kernel.propagate_batch, coef, nus, order)
    t_py, out_p = run(pyfallback.propagate_batch, coef, nus[:n_fallback], order)
    t_py_scaled = t_py * (len(nus) / n_fallback)

    print(f"\n{name}  ({len(nus)} integrations, order={order})")
    if t_compiled is not None:
        per = t_compiled / len(nus) * 1e6
        print(f"  cython  : {t_compiled:8.3f} s   ({per:7.1f} us each)")
        diff = np.max(np.abs(out_c[:n_fallback] - out_p))
        print(f"  python  : {t_py_scaled:8.3f} s   (scaled from "
              f"{n_fallback} runs)")
        print(f"  speedup : {t_py_scaled / t_compiled:8.1f} x"
              f"    max |difference| = {diff:.2e}")
    else:
        print(f"  python  : {t_py_scaled:8.3f} s   (compiled core not built)")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="smaller workloads (CI-sized)")
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    n_scan = 200 if args.quick else 1000
    n_grid = 400 if args.quick else 4000
    n_fb = 10 if args.quick else 25

    print(f"kernel backend selected at import: {kernel.BACKEND}")

    bench("band/criterion scan (real nu, with nu-derivatives)",
          rng.uniform(-60.0, 1.0, n_scan), order=2, n_fallback=n_fb)
    bench("spectrum grid (complex nu)",
          rng.uniform(-40.0, 1.0, n_grid) + 1j * rng.uniform(-3.0, 3.0, n_grid),
          order=0, n_fallback=n_fb)


if __name__ == "__main__":
    main()
