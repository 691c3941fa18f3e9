"""Hot numeric kernels for moment propagation.

The RK4 stepping loop over a stroke span is the runtime hot spot (protocols
take 1e5..1e6 micro-steps of 2N x 2N matrix algebra).  Two interchangeable
implementations are provided:

* a numba ``@njit`` version (default when numba imports cleanly), and
* a pure-numpy fallback.

Selection: set the environment variable ``OMCOOL_NUMBA=0`` before import to
force the numpy path.  ``BACKEND`` reports which one is active.  Both
implement the same contract and agree to float roundoff; the benchmark in
``benchmarks/bench_kernels.py`` compares them.

Kernel contract: ``rk4_span(mean, cov, A, dsub, h, dvec)`` advances the
first/second moments in place through ``(len(dsub) - 1) // 2`` RK4 steps of
size h.  ``A`` is a working drift matrix whose static entries are prefilled
(see ``fill_drift``); only the cavity rotation entries A[0,1], A[1,0] depend
on the detuning and are patched from ``dsub``, which holds the detuning at
every RK4 substage time (t0, t0+h/2, t0+h, ...; stride 2 per step).
``dvec`` is the diagonal of the diffusion matrix.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_env = os.environ.get("OMCOOL_NUMBA", "1").strip().lower()
_want_numba = _env not in ("0", "false", "off", "no")
NUMBA_AVAILABLE = numba is not None
BACKEND = "numba" if (NUMBA_AVAILABLE and _want_numba) else "numpy"


def fill_drift(A, delta_now, omega0, omega_b, g, kappa, gamma_m, delta_t):
    """Fill the drift matrix of the moment equations, d<z>/dt = A <z>.

    Mode order is (a, b, targets...) with interleaved (x, p) quadratures.
    Each mode contributes a rotation at its frequency (-delta for the cavity)
    plus -rate/2 diagonal damping; the optomechanical coupling enters the
    momenta as -2g x, the parametric coupling as a beam-splitter block.
    ``omega0[k]`` is the active exchange amplitude on target k (usually one
    nonzero entry at most).
    """
    n = A.shape[0]
    for i in range(n):
        for j in range(n):
            A[i, j] = 0.0
    A[0, 0] = -0.5 * kappa
    A[1, 1] = -0.5 * kappa
    A[0, 1] = -delta_now
    A[1, 0] = delta_now
    A[2, 2] = -0.5 * gamma_m
    A[3, 3] = -0.5 * gamma_m
    A[2, 3] = omega_b
    A[3, 2] = -omega_b
    A[1, 2] -= 2.0 * g
    A[3, 0] -= 2.0 * g
    for k in range(delta_t.shape[0]):
        i0 = 4 + 2 * k
        A[i0, i0] = -0.5 * gamma_m
        A[i0 + 1, i0 + 1] = -0.5 * gamma_m
        A[i0, i0 + 1] = delta_t[k]
        A[i0 + 1, i0] = -delta_t[k]
        om = omega0[k]
        if om != 0.0:
            A[2, i0 + 1] += om
            A[3, i0] -= om
            A[i0, 3] += om
            A[i0 + 1, 2] -= om
    return A


def rk4_span_numpy(mean, cov, A, dsub, h, dvec):
    """Pure-numpy implementation of the span kernel (in-place)."""
    n = mean.shape[0]
    idx = np.arange(n)
    nsteps = (dsub.shape[0] - 1) // 2

    def rhs(a, m, s):
        km = a @ m
        x = a @ s
        kc = x + x.T
        kc[idx, idx] += dvec
        return km, kc

    for step in range(nsteps):
        d0 = dsub[2 * step]
        dh = dsub[2 * step + 1]
        d1 = dsub[2 * step + 2]
        A[0, 1] = -d0
        A[1, 0] = d0
        k1m, k1c = rhs(A, mean, cov)
        A[0, 1] = -dh
        A[1, 0] = dh
        k2m, k2c = rhs(A, mean + 0.5 * h * k1m, cov + 0.5 * h * k1c)
        k3m, k3c = rhs(A, mean + 0.5 * h * k2m, cov + 0.5 * h * k2c)
        A[0, 1] = -d1
        A[1, 0] = d1
        k4m, k4c = rhs(A, mean + h * k3m, cov + h * k3c)
        mean += (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
        cov += (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
    return mean, cov


def _rk4_span_loops(mean, cov, A, dsub, h, dvec):
    # loop-oriented twin of rk4_span_numpy, written for nopython compilation
    n = mean.shape[0]
    X = np.empty((n, n))
    k1c = np.empty((n, n))
    k2c = np.empty((n, n))
    k3c = np.empty((n, n))
    k4c = np.empty((n, n))
    yc = np.empty((n, n))
    k1m = np.empty(n)
    k2m = np.empty(n)
    k3m = np.empty(n)
    k4m = np.empty(n)
    ym = np.empty(n)
    nsteps = (dsub.shape[0] - 1) // 2

    for step in range(nsteps):
        d0 = dsub[2 * step]
        dh = dsub[2 * step + 1]
        d1 = dsub[2 * step + 2]

        # stage 1 at t
        A[0, 1] = -d0
        A[1, 0] = d0
        for i in range(n):
            acc = 0.0
            for k in range(n):
                acc += A[i, k] * mean[k]
            k1m[i] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += A[i, k] * cov[k, j]
                X[i, j] = acc
        for i in range(n):
            for j in range(n):
                k1c[i, j] = X[i, j] + X[j, i]
            k1c[i, i] += dvec[i]

        # stage 2 at t + h/2
        A[0, 1] = -dh
        A[1, 0] = dh
        for i in range(n):
            ym[i] = mean[i] + 0.5 * h * k1m[i]
            for j in range(n):
                yc[i, j] = cov[i, j] + 0.5 * h * k1c[i, j]
        for i in range(n):
            acc = 0.0
            for k in range(n):
                acc += A[i, k] * ym[k]
            k2m[i] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += A[i, k] * yc[k, j]
                X[i, j] = acc
        for i in range(n):
            for j in range(n):
                k2c[i, j] = X[i, j] + X[j, i]
            k2c[i, i] += dvec[i]

        # stage 3 at t + h/2
        for i in range(n):
            ym[i] = mean[i] + 0.5 * h * k2m[i]
            for j in range(n):
                yc[i, j] = cov[i, j] + 0.5 * h * k2c[i, j]
        for i in range(n):
            acc = 0.0
            for k in range(n):
                acc += A[i, k] * ym[k]
            k3m[i] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += A[i, k] * yc[k, j]
                X[i, j] = acc
        for i in range(n):
            for j in range(n):
                k3c[i, j] = X[i, j] + X[j, i]
            k3c[i, i] += dvec[i]

        # stage 4 at t + h
        A[0, 1] = -d1
        A[1, 0] = d1
        for i in range(n):
            ym[i] = mean[i] + h * k3m[i]
            for j in range(n):
                yc[i, j] = cov[i, j] + h * k3c[i, j]
        for i in range(n):
            acc = 0.0
            for k in range(n):
                acc += A[i, k] * ym[k]
            k4m[i] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += A[i, k] * yc[k, j]
                X[i, j] = acc
        for i in range(n):
            for j in range(n):
                k4c[i, j] = X[i, j] + X[j, i]
            k4c[i, i] += dvec[i]

        h6 = h / 6.0
        for i in range(n):
            mean[i] += h6 * (k1m[i] + 2.0 * k2m[i] + 2.0 * k3m[i] + k4m[i])
            for j in range(n):
                cov[i, j] += h6 * (k1c[i, j] + 2.0 * k2c[i, j] + 2.0 * k3c[i, j] + k4c[i, j])
    return mean, cov


if NUMBA_AVAILABLE:
    rk4_span_numba = numba.njit(cache=True)(_rk4_span_loops)
else:
    rk4_span_numba = None

rk4_span = rk4_span_numba if BACKEND == "numba" else rk4_span_numpy
