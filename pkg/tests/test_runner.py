import numpy as np
import pytest

from omcool.errors import TruncationError
from omcool.params import SystemParams
from omcool.polariton import (
    CoolingMapParams,
    bogoliubov_basis,
    cooling_limit,
    exchange_efficiency,
    iterate_cooling_map,
)
from omcool.runner import (
    FockOptions,
    InitialOccupations,
    Trajectory,
    adiabaticity_probe,
    analyze_cycles,
    run_protocol,
)
from omcool.schedule import CycleSchedule, Stroke, StrokeKind, build_default_cycle


def params(**over):
    kwargs = dict(omega_b=2000.0, g=200.0, kappa=40.0, gamma=1.0, n_a=0.5, n_b=2.0,
                  delta_i=-6000.0, delta_f=-600.0, omega_0=200.0,
                  delta_targets=(2000.0,), n_targets=(12.0,))
    kwargs.update(over)
    return SystemParams(**kwargs)


class TestRunProtocol:
    def test_zero_coupling_relaxes_toward_bath(self):
        p = params()
        sched = CycleSchedule(strokes=(Stroke.hold(0.6),), cycle_count=1,
                              delta_start=-6000.0)
        init = InitialOccupations(basis="bare", pair=(0.5, 2.0), targets=(2.0,))
        traj = run_protocol(p, sched, "gaussian", init, tol=1e-8)
        n_c = traj.occupations[:, 2]
        assert np.all(np.diff(n_c) > -1e-9)
        assert n_c[-1] > n_c[0] + 3.0  # heading to n_c = 12 with gamma * t = 0.6

    def test_markers_match_boundaries_exactly(self, fig1_params):
        sched = build_default_cycle(fig1_params, 0.04, 0.008, 0.04, 0.1,
                                    targets=[0], cycles=2)
        traj = run_protocol(fig1_params, sched, "gaussian", samples_per_stroke=4)
        assert np.array_equal(traj.markers, sched.boundaries())
        for t in traj.markers:
            assert np.any(traj.times == t)

    def test_deterministic_bit_identical(self, fig1_params):
        sched = build_default_cycle(fig1_params, 0.04, 0.008, 0.04, 0.1, targets=[0])
        t1 = run_protocol(fig1_params, sched, "gaussian", samples_per_stroke=6)
        t2 = run_protocol(fig1_params, sched, "gaussian", samples_per_stroke=6)
        assert np.array_equal(t1.occupations, t2.occupations)
        assert np.array_equal(t1.n_polariton, t2.n_polariton)
        assert t1.fingerprint == t2.fingerprint

    def test_stroke_index_and_omega0_columns(self, fig1_params):
        sched = build_default_cycle(fig1_params, 0.04, 0.008, 0.04, 0.1, targets=[0])
        traj = run_protocol(fig1_params, sched, "gaussian", samples_per_stroke=8)
        during_pulse = (traj.times > 0.04) & (traj.times < 0.048)
        assert np.all(traj.omega0_active[during_pulse] == 200.0)
        assert np.all(traj.stroke_index[during_pulse] == 1)
        outside = traj.times > 0.048
        assert np.all(traj.omega0_active[outside] == 0.0)

    def test_fock_engine_requires_options_and_bare_basis(self, small_params):
        sched = build_default_cycle(small_params, 0.3, 0.32, 0.3, 0.5, targets=[0])
        with pytest.raises(ValueError, match="fock_options"):
            run_protocol(small_params, sched, "fock")
        with pytest.raises(ValueError, match="bare"):
            run_protocol(
                small_params, sched, "fock",
                InitialOccupations(basis="polariton", pair=(0.1, 0.2), targets=(0.25,)),
                fock_options=FockOptions(cutoffs=(6, 6, 8)),
            )

    def test_engine_errors_carry_stroke_index(self, small_params):
        sched = build_default_cycle(small_params, 0.3, 0.32, 0.3, 0.5, targets=[0])
        init = InitialOccupations(basis="bare", pair=(0.0, 0.0), targets=(0.25,))
        with pytest.raises(TruncationError, match="stroke"):
            run_protocol(small_params, sched, "fock", init,
                         fock_options=FockOptions(cutoffs=(2, 2, 8)))

    def test_strictly_increasing_times_enforced(self):
        with pytest.raises(ValueError, match="increasing"):
            Trajectory(
                times=np.array([0.0, 0.0]), occupations=np.zeros((2, 3)),
                n_polariton=np.zeros((2, 2)), delta=np.zeros(2),
                omega0_active=np.zeros(2), stroke_index=np.zeros(2, dtype=int),
                markers=np.zeros(1), spans=(), engine="gaussian",
                fingerprint="", mode_labels=("a", "b", "c"),
            )


class TestAnalyzeCycles:
    def _synthetic_trajectory(self, p, sched):
        """Trajectory whose target occupations follow the analytic map exactly."""
        spans = tuple(sched.spans())
        basis = bogoliubov_basis(p.delta_f, p.omega_b, p.g)
        eta, _ = exchange_efficiency(basis, p.delta_targets[0], p.omega_0)
        r = float(np.exp(-p.gamma * sched.period))
        cmp_params = CoolingMapParams(eta=eta, r=r, n_a=p.n_a, n_c=p.n_targets[0])
        posts = iterate_cooling_map(cmp_params, p.n_targets[0], sched.cycle_count)
        times = sched.boundaries()
        # samples sit on span boundaries: sample i is the start of span i;
        # pin the pre/post values of each exchange span by index
        n_c = np.empty_like(times)
        current = posts[0]
        for i, span in enumerate(spans):
            if span.kind is StrokeKind.EXCHANGE_PULSE:
                current = p.n_targets[0] + r * (posts[span.cycle] - p.n_targets[0])
                n_c[i] = current
                current = posts[span.cycle + 1]
            else:
                n_c[i] = current
        n_c[-1] = current
        occupations = np.column_stack([np.full_like(times, p.n_a),
                                       np.full_like(times, p.n_b), n_c])
        return Trajectory(
            times=times, occupations=occupations,
            n_polariton=np.zeros((times.size, 2)),
            delta=np.array([sched.delta_at(t) for t in times]),
            omega0_active=np.zeros_like(times),
            stroke_index=np.zeros(times.size, dtype=int),
            markers=times, spans=spans, engine="synthetic", fingerprint="",
            mode_labels=("a", "b", "c"),
        ), cmp_params

    def test_synthetic_map_reproduced_exactly(self, fig1_params):
        sched = build_default_cycle(fig1_params, 0.04, 0.008, 0.04, 0.1,
                                    targets=[0], cycles=4)
        traj, cmp_params = self._synthetic_trajectory(fig1_params, sched)
        report = analyze_cycles(traj, fig1_params)
        for rec in report.cycles:
            assert rec.deviation < 1e-12
        assert report.cooling_limit == pytest.approx(cooling_limit(cmp_params), rel=1e-12)

    def test_single_cycle_gives_one_pair(self, fig1_params):
        sched = build_default_cycle(fig1_params, 0.04, 0.008, 0.04, 0.1,
                                    targets=[0], cycles=1)
        traj, _ = self._synthetic_trajectory(fig1_params, sched)
        report = analyze_cycles(traj, fig1_params)
        assert len(report.cycles) == 1

    def test_requires_exchange_markers(self, fig1_params):
        sched = CycleSchedule(strokes=(Stroke.hold(0.1),), cycle_count=1,
                              delta_start=-6000.0)
        traj = run_protocol(fig1_params, sched, "gaussian", samples_per_stroke=4)
        with pytest.raises(ValueError, match="no exchange stroke"):
            analyze_cycles(traj, fig1_params)


class TestEmpiricalMapSlope:
    def test_matches_analytic_contraction(self):
        # Detune the pulse so eta ~ 0.5: the per-cycle contraction
        # (1 - eta) r is then large enough to measure against the
        # cycle-to-cycle interference wiggle (near eta = 1 the residual
        # contraction ~1e-3 drowns in it).
        p = params(delta_targets=(1616.0,))
        basis = bogoliubov_basis(p.delta_f, p.omega_b, p.g)
        eta, omega_p = exchange_efficiency(basis, 1616.0, p.omega_0)
        assert 0.3 < eta < 0.7
        tau2 = float(np.pi / (2 * omega_p))
        sched = build_default_cycle(p, 0.04, tau2, 0.04, 0.1, targets=[0],
                                    cycles=4, ramp_shape="adiabatic")
        init = InitialOccupations(basis="polariton", pair=(0.5, 2.0), targets=(12.0,))
        traj = run_protocol(p, sched, "gaussian", init, tol=1e-7,
                            samples_per_stroke=8)
        report = analyze_cycles(traj, p)
        posts = np.array([c.n_after for c in report.cycles])
        diffs = np.diff(posts)
        slope = float(np.mean(diffs[1:] / diffs[:-1]))
        analytic = (1.0 - report.eta) * report.r
        assert abs(slope - analytic) / analytic < 0.25


class TestAdiabaticityProbe:
    def test_decoupled_modes_conserved(self):
        # g = 0 on a ramp that stays on one side of the crossing
        p = params(g=0.0, delta_i=-6000.0, delta_f=-2500.0)
        assert adiabaticity_probe(p, 0.02) < 1e-9

    def test_slow_ramp_is_adiabatic(self, fig1_params):
        # tau = 40 / (2 g)
        assert adiabaticity_probe(fig1_params, 0.1) < 0.05

    def test_fast_ramp_is_diabatic(self, fig1_params):
        # tau = 0.1 / (2 g)
        assert adiabaticity_probe(fig1_params, 0.00025) > 0.2

    def test_monotone_in_ramp_duration(self, fig1_params):
        taus = [0.0125, 0.025, 0.05, 0.1]
        probes = [adiabaticity_probe(fig1_params, tau) for tau in taus]
        violations = [nxt - prev for prev, nxt in zip(probes[:-1], probes[1:])
                      if nxt > prev + 1e-3]
        assert not violations, f"non-monotone probe values: {probes}"
