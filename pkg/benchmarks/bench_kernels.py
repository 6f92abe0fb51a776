#!/usr/bin/env python3
"""Benchmark the ensemble branch-factor kernel: numba backend vs numpy fallback.

The workload mirrors the composite-noise pipeline: a 1000-point target-mode
frequency grid times a 1000-point Rabi-scale grid (1e6 parameter points per
density operator).  Run with --quick for a 100x100 grid.

    python benchmarks/bench_kernels.py [--quick] [--ions 2 3 6]
"""

import argparse
import time

import numpy as np

import mssim
from mssim._kernels import HAS_NUMBA
from mssim._kernels_numpy import branch_signs, ms_factor_ensemble as kernel_numpy
from mssim.noise import GaussianFluctuation
from mssim.propagator import displacements, geometric_phase


def build_workload(n, k1, k2):
    two_pi = 2 * np.pi
    freqs, vecs = mssim.transverse_normal_modes(n, two_pi * 1.74e6, two_pi * 0.5e6)
    eta = mssim.lamb_dicke_matrix(vecs, freqs)
    chain = mssim.IonChainConfig(n=n, mode_freqs=freqs, eigenvectors=vecs,
                                 lamb_dicke=eta)
    target = n // 2
    mu = freqs[target] - two_pi * 6e3
    pulse = mssim.MSPulse(mu=mu, rabi=np.full(n, two_pi * 2.7e4),
                          duration=1.0, target_mode=target)
    t = 3 * mssim.loop_time(pulse, chain)
    offsets, w_outer = GaussianFluctuation("target_mode_freq", two_pi * 300.0,
                                           grid_points=k1).grid()
    rel, w_inner = GaussianFluctuation("rabi_rate_relative", 0.015,
                                       grid_points=k2).grid()
    chis = np.empty((k1, n, n))
    alphas = np.empty((k1, n, n), dtype=complex)
    for k, off in enumerate(offsets):
        mf = chain.mode_freqs.copy()
        mf[target] += off
        chis[k] = geometric_phase(chain, pulse, t, mode_freqs=mf)
        alphas[k] = displacements(chain, pulse, t, mode_freqs=mf)
    return (branch_signs(n), chis, alphas, w_outer, 1.0 + rel, w_inner,
            np.full(n, 1.0))


def time_kernel(kernel, args, repeats):
    kernel(*args)  # warm up / compile
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = kernel(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def run(ions, k1, k2, repeats):
    print(f"{'ions':>5} {'points':>9} {'numpy [s]':>10} {'numba [s]':>10} "
          f"{'speedup':>8} {'max |diff|':>11}")
    for n in ions:
        args = build_workload(n, k1, k2)
        t_np, out_np = time_kernel(kernel_numpy, args, repeats)
        if HAS_NUMBA:
            from mssim._kernels_numba import ms_factor_ensemble as kernel_numba
            t_nb, out_nb = time_kernel(kernel_numba, args, repeats)
            diff = np.max(np.abs(out_np - out_nb))
            print(f"{n:>5} {k1 * k2:>9} {t_np:>10.3f} {t_nb:>10.3f} "
                  f"{t_np / t_nb:>8.1f} {diff:>11.2e}")
        else:
            print(f"{n:>5} {k1 * k2:>9} {t_np:>10.3f} {'n/a':>10} {'n/a':>8}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="100x100 grids")
    ap.add_argument("--ions", type=int, nargs="+", default=[2, 3, 6])
    ap.add_argument("--repeats", type=int, default=3)
    opts = ap.parse_args()
    side = 100 if opts.quick else 1000
    run(opts.ions, side, side, opts.repeats)
