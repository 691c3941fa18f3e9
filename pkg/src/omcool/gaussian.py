"""Exact propagation of Gaussian first/second moments with thermal damping.

For the linearized model every state of interest is Gaussian, so the full
open-system dynamics reduces to

    d<z>/dt  = A(t) <z>
    d sigma/dt = A(t) sigma + sigma A(t)^T + D

over the 2N quadratures z = (x_a, p_a, x_b, p_b, x_c, p_c, ...), with the
convention x = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2) and vacuum
variance 1/2.  A carries the symplectic Hamiltonian flow plus -rate/2
damping, D = diag(rate * (2 n_bath + 1) / 2) per quadrature.

Integration is fixed-step RK4 with the step bounded by 1/(50 f_max) for the
largest frequency scale f_max of each stroke; steps never cross stroke
boundaries, the drift is rebuilt from delta(t) at every RK4 substage during
ramps, and each stroke is accepted only after Richardson step-halving puts
the estimated error below ``tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import IntegrationError
from .params import SystemParams
from .polariton import PolaritonBasis, check_stability, symplectic_form
from .schedule import CycleSchedule, StrokeSpan

_MODE_NAMES = "abcdefghijklmnopqrstuvwxyz"

SYMMETRY_TOL = 1e-12
UNCERTAINTY_TOL = 1e-9
_MAX_REFINE = 14


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and quadrature covariance matrix of a Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray
    time: float = 0.0
    mode_labels: tuple[str, ...] = ()

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size % 2 != 0:
            raise ValueError("mean must be a flat vector of length 2N")
        if cov.shape != (mean.size, mean.size):
            raise ValueError("cov must be 2N x 2N")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        if not self.mode_labels:
            object.__setattr__(self, "mode_labels", tuple(_MODE_NAMES[: mean.size // 2]))

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def uncertainty_min_eig(self) -> float:
        """Smallest eigenvalue of cov + i J / 2 (>= 0 for a physical state)."""
        J = symplectic_form(self.n_modes)
        return float(np.linalg.eigvalsh(self.cov + 0.5j * J).min())

    def validate(self, symmetry_tol: float = SYMMETRY_TOL,
                 uncertainty_tol: float = UNCERTAINTY_TOL) -> None:
        scale = max(1.0, float(np.max(np.abs(self.cov))))
        asym = float(np.max(np.abs(self.cov - self.cov.T)))
        if asym > symmetry_tol * scale:
            raise IntegrationError(
                f"covariance asymmetry {asym:.3e} at t={self.time}", time=self.time
            )
        min_eig = self.uncertainty_min_eig()
        if min_eig < -uncertainty_tol:
            raise IntegrationError(
                f"uncertainty relation violated (min eig {min_eig:.3e}) at t={self.time}",
                time=self.time,
            )
        if np.min(mode_occupations(self)) < -uncertainty_tol:
            raise IntegrationError(
                f"negative mode occupation at t={self.time}", time=self.time
            )


def thermal_state(occupations, time: float = 0.0, mode_labels=()) -> GaussianState:
    """Product thermal state in the bare-mode basis (zero means)."""
    occupations = np.asarray(occupations, dtype=float)
    if np.any(occupations < 0):
        raise ValueError("occupations must be non-negative")
    diag = np.repeat(occupations + 0.5, 2)
    return GaussianState(
        mean=np.zeros(2 * occupations.size),
        cov=np.diag(diag),
        time=time,
        mode_labels=tuple(mode_labels),
    )


def polariton_initial_state(
    basis: PolaritonBasis, n_A: float, n_B: float, target_occupations=(),
    time: float = 0.0,
) -> GaussianState:
    """Thermal state specified in the polariton basis of the (a, b) pair.

    The target modes are bare thermal modes; the (a, b) block is the inverse
    symplectic image of a polariton-diagonal thermal covariance.
    """
    if n_A < 0 or n_B < 0:
        raise ValueError("polariton occupations must be non-negative")
    s_inv = basis.inverse()
    cov_pol = np.diag([n_A + 0.5, n_A + 0.5, n_B + 0.5, n_B + 0.5])
    cov_ab = s_inv @ cov_pol @ s_inv.T
    targets = np.asarray(target_occupations, dtype=float)
    n = 2 + targets.size
    cov = np.zeros((2 * n, 2 * n))
    cov[:4, :4] = cov_ab
    for k, occ in enumerate(targets):
        if occ < 0:
            raise ValueError("occupations must be non-negative")
        i0 = 4 + 2 * k
        cov[i0, i0] = cov[i0 + 1, i0 + 1] = occ + 0.5
    return GaussianState(mean=np.zeros(2 * n), cov=cov, time=time)


def mode_occupations(state: GaussianState) -> np.ndarray:
    """Mean occupation per bare mode, N = (sigma_xx + sigma_pp - 1)/2 + |mean|^2/2."""
    d = np.diag(state.cov)
    therm = 0.5 * (d[0::2] + d[1::2] - 1.0)
    coh = 0.5 * (state.mean[0::2] ** 2 + state.mean[1::2] ** 2)
    return therm + coh


def polariton_occupations(state: GaussianState, basis: PolaritonBasis) -> tuple[float, float]:
    """(N_A, N_B) computed by rotating the (a, b) marginal into the polariton basis."""
    if state.n_modes < 2:
        raise ValueError("state must contain the cavity and mechanical modes")
    m = basis.S @ state.mean[:4]
    c = basis.S @ state.cov[:4, :4] @ basis.S.T
    n_a = 0.5 * (c[0, 0] + c[1, 1] - 1.0) + 0.5 * (m[0] ** 2 + m[1] ** 2)
    n_b = 0.5 * (c[2, 2] + c[3, 3] - 1.0) + 0.5 * (m[2] ** 2 + m[3] ** 2)
    return float(n_a), float(n_b)


@dataclass(frozen=True)
class DriftDiffusion:
    """Drift matrix A and diffusion matrix D of the moment equations."""

    A: np.ndarray
    D: np.ndarray
    valid_at: float


def diffusion_vector(params: SystemParams) -> np.ndarray:
    """Diagonal of D: rate * (2 n_bath + 1) / 2 for each quadrature."""
    occ = [params.n_a, params.n_b, *params.n_targets]
    rates = [params.kappa, params.gamma] + [params.gamma] * len(params.n_targets)
    return np.repeat([r * (n + 0.5) for r, n in zip(rates, occ)], 2)


def _omega0_vector(params: SystemParams, target: int | None, amplitude: float) -> np.ndarray:
    om = np.zeros(len(params.delta_targets))
    if target is not None and amplitude != 0.0:
        om[target] = amplitude
    return om


def build_drift_diffusion(
    params: SystemParams, delta_now: float, omega0_now=None,
) -> DriftDiffusion:
    """Assemble A and D at a given detuning and exchange-amplitude setting.

    ``omega0_now`` is an array of per-target exchange amplitudes (defaults to
    all zero).  Raises StabilityError before any propagation would go
    unstable at this detuning.
    """
    check_stability(delta_now, params.omega_b, params.g)
    if omega0_now is None:
        omega0_now = np.zeros(len(params.delta_targets))
    omega0_now = np.asarray(omega0_now, dtype=float)
    if omega0_now.shape != (len(params.delta_targets),):
        raise ValueError("omega0_now must have one entry per target mode")
    n = 2 * params.n_modes
    A = np.zeros((n, n))
    _kernels.fill_drift(
        A, delta_now, omega0_now, params.omega_b, params.g,
        params.kappa, params.gamma, np.asarray(params.delta_targets),
    )
    return DriftDiffusion(A=A, D=np.diag(diffusion_vector(params)), valid_at=delta_now)


@dataclass(frozen=True)
class GaussianTrajectory:
    """Sampled moment trajectory: times, means (S, 2N) and covariances (S, 2N, 2N)."""

    times: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    mode_labels: tuple[str, ...]

    def __len__(self) -> int:
        return self.times.size

    def state_at(self, i: int) -> GaussianState:
        return GaussianState(
            mean=self.means[i], cov=self.covs[i], time=float(self.times[i]),
            mode_labels=self.mode_labels,
        )

    def occupations(self) -> np.ndarray:
        """(S, N) bare-mode occupations along the trajectory."""
        d = np.einsum("sii->si", self.covs)
        therm = 0.5 * (d[:, 0::2] + d[:, 1::2] - 1.0)
        coh = 0.5 * (self.means[:, 0::2] ** 2 + self.means[:, 1::2] ** 2)
        return therm + coh

    @property
    def final_state(self) -> GaussianState:
        return self.state_at(len(self) - 1)


def _span_fmax(span: StrokeSpan, params: SystemParams) -> float:
    scales = [abs(span.delta0), abs(span.delta1), params.omega_b, params.kappa,
              params.gamma, 2.0 * params.g, span.amplitude, 1.0]
    scales.extend(params.delta_targets)
    return max(scales)


def default_sample_times(
    schedule: CycleSchedule, t_start: float, t_end: float, samples_per_stroke: int = 32
) -> np.ndarray:
    """Output grid: all stroke boundaries plus uniform interior points."""
    pts = [np.array([t_start, t_end])]
    for span in schedule.spans():
        lo, hi = max(span.t_start, t_start), min(span.t_end, t_end)
        if hi <= lo:
            continue
        pts.append(np.array([lo, hi]))
        if samples_per_stroke > 1:
            pts.append(np.linspace(lo, hi, samples_per_stroke + 1)[1:-1])
    return np.unique(np.concatenate(pts))


def propagate(
    state: GaussianState,
    schedule: CycleSchedule,
    t_end: float,
    tol: float = 1e-8,
    params: SystemParams | None = None,
    sample_times=None,
    samples_per_stroke: int = 32,
    validate: bool = True,
) -> GaussianTrajectory:
    """Propagate a Gaussian state through the schedule up to ``t_end``.

    ``params`` supplies the frequencies, couplings and rates (it is required;
    the keyword default only keeps the signature stable).  The returned
    trajectory is sampled at ``sample_times`` (stroke boundaries are always
    included) and every sample is checked against the state invariants
    unless ``validate=False``.
    """
    if params is None:
        raise ValueError("params is required")
    if state.n_modes != params.n_modes:
        raise ValueError(
            f"state has {state.n_modes} modes but params describe {params.n_modes}"
        )
    t0 = state.time
    if t_end < t0:
        raise ValueError(f"t_end={t_end} precedes the state time {t0}")
    if t_end > schedule.total_duration * (1.0 + 1e-12):
        raise ValueError(
            f"t_end={t_end} exceeds the schedule duration {schedule.total_duration}"
        )
    if tol <= 0:
        raise ValueError("tol must be positive")

    spans = [s for s in schedule.spans() if s.t_end > t0 and s.t_start < t_end]
    for span in spans:
        check_stability(span.delta0, params.omega_b, params.g)
        check_stability(span.delta1, params.omega_b, params.g)

    if sample_times is None:
        grid = default_sample_times(schedule, t0, t_end, samples_per_stroke)
    else:
        grid = np.unique(np.asarray(sample_times, dtype=float))
        if grid.size and (grid[0] < t0 or grid[-1] > t_end):
            raise ValueError("sample_times must lie within [state.time, t_end]")
        edges = [np.array([t0, t_end])] + [
            np.array([max(s.t_start, t0), min(s.t_end, t_end)]) for s in spans
        ]
        grid = np.unique(np.concatenate([grid] + edges))

    dvec = diffusion_vector(params)
    delta_t_arr = np.asarray(params.delta_targets)
    n = 2 * params.n_modes
    mean = np.ascontiguousarray(state.mean, dtype=float).copy()
    cov = np.ascontiguousarray(state.cov, dtype=float).copy()

    times_out = [t0]
    means_out = [mean.copy()]
    covs_out = [cov.copy()]

    kernel = _kernels.rk4_span
    A = np.zeros((n, n))

    for span in spans:
        seg_start = max(span.t_start, t0)
        seg_end = min(span.t_end, t_end)
        if seg_end <= seg_start:
            continue
        omega0 = _omega0_vector(params, span.target, span.amplitude)
        _kernels.fill_drift(A, span.delta0, omega0, params.omega_b, params.g,
                            params.kappa, params.gamma, delta_t_arr)
        h_target = 1.0 / (50.0 * _span_fmax(span, params))

        targets_local = grid[(grid > seg_start) & (grid <= seg_end)]
        if targets_local.size == 0 or targets_local[-1] < seg_end:
            targets_local = np.append(targets_local, seg_end)
        starts = np.concatenate(([seg_start], targets_local[:-1]))
        lengths = targets_local - starts
        base_counts = np.maximum(1, np.ceil(lengths / h_target - 1e-12).astype(np.int64))

        def run_pass(m0, c0, counts, record):
            m = m0.copy()
            c = c0.copy()
            rec_m, rec_c = [], []
            for t_a, length, nst in zip(starts, lengths, counts):
                h = length / nst
                t_loc = (t_a - span.t_start) + 0.5 * h * np.arange(2 * nst + 1)
                dsub = span.delta_values_local(t_loc)
                kernel(m, c, A, dsub, h, dvec)
                if record:
                    rec_m.append(m.copy())
                    rec_c.append(c.copy())
            return m, c, rec_m, rec_c

        counts = base_counts
        for attempt in range(_MAX_REFINE + 1):
            m_coarse, c_coarse, _, _ = run_pass(mean, cov, counts, record=False)
            m_fine, c_fine, rec_m, rec_c = run_pass(mean, cov, 2 * counts, record=True)
            err = max(
                float(np.max(np.abs(m_fine - m_coarse))),
                float(np.max(np.abs(c_fine - c_coarse))),
            ) / 15.0
            if err <= tol:
                break
            if attempt == _MAX_REFINE:
                raise IntegrationError(
                    f"step refinement exhausted in stroke {span.index} "
                    f"(error {err:.3e} > tol {tol:.3e})",
                    time=seg_start,
                )
            counts = 2 * counts

        mean, cov = m_fine, c_fine
        times_out.extend(targets_local.tolist())
        means_out.extend(rec_m)
        covs_out.extend(rec_c)

    traj = GaussianTrajectory(
        times=np.asarray(times_out),
        means=np.asarray(means_out),
        covs=np.asarray(covs_out),
        mode_labels=state.mode_labels or params.mode_labels,
    )
    if validate:
        for i in range(len(traj)):
            traj.state_at(i).validate()
    return traj


def steady_state_residual(dd: DriftDiffusion, cov: np.ndarray) -> float:
    """Max-norm of A sigma + sigma A^T + D (zero at a stationary covariance)."""
    return float(np.max(np.abs(dd.A @ cov + cov @ dd.A.T + dd.D)))
