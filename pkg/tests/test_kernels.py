import numpy as np
import pytest

from omcool import _kernels
from omcool.errors import StabilityError
from omcool.gaussian import build_drift_diffusion, diffusion_vector
from omcool.params import SystemParams


def fig1_like(**over):
    kwargs = dict(omega_b=2000.0, g=200.0, kappa=40.0, gamma=1.0, n_a=0.5, n_b=2.0,
                  delta_i=-6000.0, delta_f=-600.0, omega_0=200.0,
                  delta_targets=(2000.0,), n_targets=(12.0,))
    kwargs.update(over)
    return SystemParams(**kwargs)


class TestDriftDiffusion:
    def test_single_mode_block(self):
        p = fig1_like(g=0.0, omega_0=0.0)
        dd = build_drift_diffusion(p, -2000.0)
        block = dd.A[:2, :2]
        assert np.array_equal(block, np.array([[-20.0, 2000.0], [-2000.0, -20.0]]))

    def test_vacuum_diffusion(self):
        p = fig1_like(g=0.0, omega_0=0.0, n_a=0.0, n_b=0.0, n_targets=(0.0,))
        dvec = diffusion_vector(p)
        assert np.array_equal(dvec, [20.0, 20.0, 0.5, 0.5, 0.5, 0.5])

    def test_thermal_diffusion_scaling(self):
        dvec = diffusion_vector(fig1_like())
        # rate * (2 n + 1) / 2 per quadrature
        assert dvec[0] == pytest.approx(40.0 * (2 * 0.5 + 1) / 2)
        assert dvec[2] == pytest.approx(1.0 * (2 * 2.0 + 1) / 2)
        assert dvec[4] == pytest.approx(1.0 * (2 * 12.0 + 1) / 2)

    def test_exchange_block_antisymmetry(self):
        p = fig1_like()
        dd = build_drift_diffusion(p, -600.0, omega0_now=[200.0])
        # beam-splitter coupling: x_b gains from p_c, p_b loses x_c, and
        # symmetrically for the target
        assert dd.A[2, 5] == 200.0
        assert dd.A[3, 4] == -200.0
        assert dd.A[4, 3] == 200.0
        assert dd.A[5, 2] == -200.0

    def test_reference_drift_is_stable(self):
        dd = build_drift_diffusion(fig1_like(), -600.0, omega0_now=[200.0])
        assert dd.A.shape == (6, 6)
        assert np.max(np.linalg.eigvals(dd.A).real) < 0.0

    def test_instability_raises_before_propagation(self):
        with pytest.raises(StabilityError):
            build_drift_diffusion(fig1_like(), -50.0)


def _run_span(kernel, nsteps):
    p = fig1_like()
    dd = build_drift_diffusion(p, -6000.0)
    dvec = diffusion_vector(p)
    mean = np.array([0.3, -0.1, 0.2, 0.0, 0.05, -0.2])
    cov = np.diag([1.0, 1.0, 2.5, 2.5, 12.5, 12.5]).astype(float)
    h = 0.002 / nsteps
    dsub = np.linspace(-6000.0, -600.0, 2 * nsteps + 1)
    a_work = dd.A.copy()
    kernel(mean, cov, a_work, dsub, h, dvec)
    return mean, cov


class TestBackends:
    def test_backend_selected(self):
        assert _kernels.BACKEND in ("numba", "numpy")

    @pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba not importable")
    def test_numba_and_numpy_paths_agree(self):
        m_np, c_np = _run_span(_kernels.rk4_span_numpy, 400)
        m_nb, c_nb = _run_span(_kernels.rk4_span_numba, 400)
        assert np.max(np.abs(m_np - m_nb)) < 1e-10
        assert np.max(np.abs(c_np - c_nb)) < 1e-10

    def test_numpy_path_deterministic(self):
        m1, c1 = _run_span(_kernels.rk4_span_numpy, 200)
        m2, c2 = _run_span(_kernels.rk4_span_numpy, 200)
        assert np.array_equal(m1, m2)
        assert np.array_equal(c1, c2)

    def test_covariance_stays_bitwise_symmetric(self):
        _, cov = _run_span(_kernels.rk4_span_numpy, 100)
        assert np.array_equal(cov, cov.T)

    def test_fourth_order_convergence(self):
        m_ref, c_ref = _run_span(_kernels.rk4_span_numpy, 6400)
        errs = []
        for nsteps in (200, 400, 800):
            _, c = _run_span(_kernels.rk4_span_numpy, nsteps)
            errs.append(np.max(np.abs(c - c_ref)))
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert order1 > 3.8
        assert order2 > 3.8
