#!/usr/bin/env python3
"""Benchmark the moment-propagation kernel: numba JIT vs pure-numpy fallback.

Runs the same detuning-ramp stroke through both implementations, checks that
they agree to float roundoff, and reports per-step timings.  The numba path
is the default at import time; set OMCOOL_NUMBA=0 to make the fallback the
active backend in production code.

Usage: python benchmarks/bench_kernels.py [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

from omcool import _kernels
from omcool.gaussian import build_drift_diffusion, diffusion_vector
from omcool.params import SystemParams


def make_problem(nsteps):
    params = SystemParams(
        omega_b=2000.0, g=200.0, kappa=40.0, gamma=1.0, n_a=0.5, n_b=2.0,
        delta_i=-6000.0, delta_f=-600.0, omega_0=200.0,
        delta_targets=(2000.0,), n_targets=(12.0,),
    )
    a_static = build_drift_diffusion(params, -6000.0).A
    dvec = diffusion_vector(params)
    mean = np.array([0.1, -0.05, 0.2, 0.0, 0.3, -0.1])
    cov = np.diag([1.0, 1.0, 2.5, 2.5, 12.5, 12.5]).astype(float)
    dsub = np.linspace(-6000.0, -600.0, 2 * nsteps + 1)
    h = 0.04 / nsteps
    return mean, cov, a_static, dsub, h, dvec


def run(kernel, nsteps):
    mean, cov, a_static, dsub, h, dvec = make_problem(nsteps)
    t0 = time.perf_counter()
    kernel(mean, cov, a_static.copy(), dsub, h, dvec)
    return time.perf_counter() - t0, mean, cov


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    print(f"active backend: {_kernels.BACKEND}")
    print(f"ramp stroke, {args.steps} RK4 steps, 3 modes (6x6 moments)")

    t_np = min(run(_kernels.rk4_span_numpy, args.steps)[0]
               for _ in range(args.repeats))
    print(f"numpy fallback : {t_np:8.3f} s  ({t_np / args.steps * 1e6:7.2f} us/step)")

    if _kernels.rk4_span_numba is None:
        print("numba          : not available")
        return

    run(_kernels.rk4_span_numba, 10)  # compile outside the timed region
    t_nb = min(run(_kernels.rk4_span_numba, args.steps)[0]
               for _ in range(args.repeats))
    print(f"numba JIT      : {t_nb:8.3f} s  ({t_nb / args.steps * 1e6:7.2f} us/step)")
    print(f"speedup        : {t_np / t_nb:8.1f}x")

    _, m_np, c_np = run(_kernels.rk4_span_numpy, 2000)
    _, m_nb, c_nb = run(_kernels.rk4_span_numba, 2000)
    dev = max(np.max(np.abs(m_np - m_nb)), np.max(np.abs(c_np - c_nb)))
    print(f"path agreement : max deviation {dev:.3e}")
    assert dev < 1e-10, "backends diverged beyond roundoff"


if __name__ == "__main__":
    main()
