import math

import numpy as np
import pytest

from omcool.errors import IntegrationError, TruncationError
from omcool.fock import (
    FockState,
    ModeOperators,
    build_operators,
    mode_occupations,
    number_state,
    propagate_fock,
    quadrature_moments,
    thermal_state,
)
from omcool.params import SystemParams
from omcool.polariton import rabi_populations
from omcool.schedule import CycleSchedule, Stroke


def params(**over):
    kwargs = dict(omega_b=10.0, g=2.0, kappa=8.0, gamma=0.5, n_a=0.1, n_b=0.2,
                  delta_i=-30.0, delta_f=-3.0, omega_0=5.0,
                  delta_targets=(10.0,), n_targets=(0.25,))
    kwargs.update(over)
    return SystemParams(**kwargs)


class TestOperators:
    def test_qubit_truncated_ladder(self):
        ops = build_operators((2,))
        assert np.array_equal(ops.annihilation[0], np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_commutator_defect_only_in_top_level(self):
        ops = build_operators((7,))
        a = ops.annihilation[0]
        comm = a @ a.conj().T - a.conj().T @ a
        expected = np.eye(7)
        expected[-1, -1] = -(7 - 1)
        assert np.allclose(comm, expected, atol=1e-12)

    def test_product_dimension(self):
        assert build_operators((4, 4, 6)).dim == 96

    def test_number_diagonal(self):
        ops = build_operators((3, 2))
        n0 = ops.number(0)
        assert np.array_equal(np.diag(n0), [0, 0, 1, 1, 2, 2])
        assert np.array_equal(n0, np.diag(np.diag(n0)))

    def test_cutoff_floor(self):
        with pytest.raises(ValueError):
            build_operators((1, 4))


class TestStates:
    def test_vacuum_thermal(self):
        st = thermal_state((4, 4), (0.0, 0.0))
        assert st.rho[0, 0] == 1.0
        assert np.trace(st.rho) == pytest.approx(1.0)
        assert np.array_equal(mode_occupations(st), [0.0, 0.0])

    def test_geometric_weights(self):
        st = thermal_state((20, 2), (1.0, 0.0))
        diag = np.real(np.diag(st.rho)).reshape(20, 2)[:, 0]
        ratios = diag[1:] / diag[:-1]
        assert ratios == pytest.approx(np.full(19, 0.5), rel=1e-12)
        assert mode_occupations(st)[0] == pytest.approx(1.0, abs=1e-4)

    def test_heavy_tail_rejected(self):
        with pytest.raises(TruncationError, match="levels"):
            thermal_state((6, 2), (12.0, 0.0))

    def test_number_state(self):
        st = number_state((5, 3), (4, 1))
        assert np.array_equal(mode_occupations(st), [4.0, 1.0])
        with pytest.raises(ValueError, match="cutoff"):
            number_state((5, 3), (5, 0))

    def test_validate_flags_bad_trace(self):
        st = number_state((3, 2), (0, 0))
        bad = FockState(rho=2.0 * st.rho, cutoffs=st.cutoffs)
        with pytest.raises(IntegrationError, match="trace"):
            bad.validate()

    def test_quadrature_moments_of_thermal_state(self):
        cutoff = 8
        st = thermal_state((cutoff, cutoff), (0.4, 0.6))
        ops = ModeOperators((cutoff, cutoff))
        mean, cov = quadrature_moments(st, ops)
        assert mean == pytest.approx(np.zeros(4), abs=1e-12)
        # enumeration oracle on the truncated space: for a diagonal state,
        # <x^2> = <p^2> = sum_k w_k (k + 1/2) - (c/2) w_top, the last term
        # being the top-level commutator defect of the truncated ladder
        expected = []
        for n in (0.4, 0.6):
            q = n / (n + 1.0)
            w = (1 - q) * q ** np.arange(cutoff)
            w /= w.sum()
            var = float(np.sum(w * (np.arange(cutoff) + 0.5)) - 0.5 * cutoff * w[-1])
            expected += [var, var]
        assert np.diag(cov) == pytest.approx(expected, rel=1e-12)
        occ = mode_occupations(st, ops)
        assert occ == pytest.approx([0.4, 0.6], abs=5e-3)


class TestPropagation:
    def test_single_mode_decay(self):
        p = params(g=0.0, omega_0=0.0, gamma=0.0, kappa=40.0, n_a=0.0,
                   omega_b=1.0, delta_i=-2.0, delta_f=-1.0,
                   delta_targets=(), n_targets=())
        sched = CycleSchedule(strokes=(Stroke.hold(0.1),), cycle_count=1,
                              delta_start=-2.0)
        traj = propagate_fock(number_state((5, 2), (1, 0)), p, sched, 0.1)
        exact = np.exp(-40.0 * traj.times)
        assert np.max(np.abs(traj.occupations[:, 0] - exact)) < 1e-6

    def test_resonant_exchange_matches_closed_form(self):
        p = params(g=0.0, kappa=0.0, gamma=0.0, n_a=0.0, n_b=0.0,
                   omega_b=2000.0, delta_i=-2000.0, delta_f=-600.0,
                   omega_0=200.0, delta_targets=(2000.0,), n_targets=(0.0,))
        t_swap = math.pi / 400.0
        sched = CycleSchedule(strokes=(Stroke.exchange(0, 200.0, t_swap),),
                              cycle_count=1, delta_start=-2000.0)
        traj = propagate_fock(number_state((2, 6, 6), (0, 0, 2)), p, sched, t_swap)
        n_b, n_c = rabi_populations(0.0, 2.0, 2000.0, 2000.0, 200.0, traj.times)
        assert np.max(np.abs(traj.occupations[:, 1] - n_b)) < 1e-5
        assert np.max(np.abs(traj.occupations[:, 2] - n_c)) < 1e-5

    def test_stationary_without_couplings_or_baths(self):
        p = params(g=0.0, omega_0=0.0, kappa=0.0, gamma=0.0)
        sched = CycleSchedule(strokes=(Stroke.hold(0.05),), cycle_count=1,
                              delta_start=-30.0)
        st = thermal_state((6, 6, 6), (0.1, 0.2, 0.25))
        traj = propagate_fock(st, p, sched, 0.05)
        assert np.max(np.abs(traj.final_state.rho - st.rho)) < 1e-12

    def test_invariants_recorded_and_satisfied(self):
        p = params()
        sched = CycleSchedule(strokes=(Stroke.hold(0.2),), cycle_count=1,
                              delta_start=-30.0)
        traj = propagate_fock(thermal_state((6, 6, 6), (0.1, 0.2, 0.25)), p,
                              sched, 0.2)
        assert np.max(traj.trace_errors) < 1e-9
        assert np.max(traj.hermiticity_errors) < 1e-10
        assert np.min(traj.min_eigenvalues) > -1e-8

    def test_leakage_monitor_trips(self):
        # pump the target mode hard against a tiny cutoff: the swap pushes
        # population into the top level and must abort with a clear error
        p = params(g=0.0, kappa=0.0, gamma=0.0, n_a=0.0, n_b=0.0,
                   omega_b=10.0, omega_0=5.0, delta_targets=(10.0,),
                   n_targets=(0.0,))
        t_swap = math.pi / 10.0
        sched = CycleSchedule(strokes=(Stroke.exchange(0, 5.0, t_swap),),
                              cycle_count=1, delta_start=-30.0)
        st = number_state((2, 3, 4), (0, 2, 3))
        with pytest.raises(TruncationError, match="cutoff"):
            propagate_fock(st, p, sched, t_swap)

    def test_coarse_dt_rejected(self):
        p = params()
        sched = CycleSchedule(strokes=(Stroke.hold(0.1),), cycle_count=1,
                              delta_start=-30.0)
        st = thermal_state((6, 6, 6), (0.1, 0.2, 0.25))
        with pytest.raises(ValueError, match="dt"):
            propagate_fock(st, p, sched, 0.1, dt=0.01)

    def test_deterministic(self):
        p = params()
        sched = CycleSchedule(strokes=(Stroke.hold(0.05),), cycle_count=1,
                              delta_start=-30.0)
        st = thermal_state((6, 6, 6), (0.1, 0.2, 0.25))
        t1 = propagate_fock(st, p, sched, 0.05)
        t2 = propagate_fock(st, p, sched, 0.05)
        assert np.array_equal(t1.final_state.rho, t2.final_state.rho)
        assert np.array_equal(t1.occupations, t2.occupations)


class TestEngineAgreement:
    def test_damped_exchange_matches_gaussian(self):
        # two coupled mechanical modes with thermal damping; the cavity is a
        # vacuum spectator (g = 0), small enough for tight cutoffs
        from omcool.gaussian import propagate as propagate_gauss
        from omcool.gaussian import thermal_state as gauss_thermal

        p = params(g=0.0, kappa=0.0, n_a=0.0)
        t_end = 0.45
        sched = CycleSchedule(strokes=(Stroke.exchange(0, 5.0, t_end),),
                              cycle_count=1, delta_start=-30.0)
        occ0 = [0.0, 0.2, 0.25]
        ftraj = propagate_fock(thermal_state((2, 6, 6), occ0), p, sched, t_end,
                               samples_per_stroke=8)
        gtraj = propagate_gauss(gauss_thermal(occ0), sched, t_end, tol=1e-10,
                                params=p, sample_times=ftraj.times)
        gocc = gtraj.occupations()
        assert np.array_equal(gtraj.times, ftraj.times)
        assert np.max(np.abs(gocc - ftraj.occupations)) < 5e-4
