"""
Per-mode Schroedinger dynamics along the linear quench.

Modes are integrated in batches: the (u, v) pairs of several modes are stacked into one
complex state vector and advanced together by `scipy.integrate.solve_ivp`. A batch of one
mode is the plain single-mode integration. The default ground-branch start is integrated
backward from the end of the anneal; the diabatic and adiabatic starts run forward.
"""
import math
from typing import Iterable, List, Literal, Mapping, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.integrate import solve_ivp

from nqa_engine.domain.entities import ModeTrajectory
from nqa_engine.domain.errors import (
    DegenerateStateError,
    IncompleteModeSetError,
    IntegrationError,
    ParameterError,
)
from nqa_engine.domain.model import g_tilde_at, ground_bloch_angles, ground_branch_ratio
from nqa_engine.domain.value_objects import (
    AdiabaticProjection,
    ChainParams,
    Mode,
    ModeAmplitudes,
)

DEGENERATE_NORM = 1.0e-300

InitialState = Literal["ground_branch", "diabatic", "adiabatic"]


class IntegratorOptions(BaseModel):
    """Numerical knobs of the mode integrator."""
    method: Literal["RK45", "DOP853"] = "RK45"
    rtol: float = Field(default=1e-10, gt=0.0)
    atol: float = Field(default=1e-12, gt=0.0)
    tracking_points: int = Field(default=4096, ge=16, description="Uniform points used for Bloch-angle tracking")
    initial_state: InitialState = "ground_branch"


def default_sample_times(params: ChainParams, count: int = 512) -> np.ndarray:
    """`count` uniform points in scaled time s = t / tau, returned as times."""
    if count < 2:
        raise ParameterError(f"At least two samples are required, got {count}")
    return np.linspace(0.0, params.tau, count)


def _check_sample_times(sample_times: Sequence[float], params: ChainParams) -> np.ndarray:
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ParameterError("sample_times must be a non-empty one-dimensional sequence")
    if np.any(np.diff(times) <= 0):
        raise ParameterError("sample_times must be strictly increasing")
    if times[0] < 0 or times[-1] > params.tau * (1 + 1e-12):
        raise ParameterError(f"sample_times must lie within [0, tau={params.tau}]")
    return np.minimum(times, params.tau)


def _schroedinger_rhs(t, y, cos_phi, sin_phi, J, gamma, tau):
    m = cos_phi.size
    u, v = y[:m], y[m:]
    g_tilde = gamma * (tau - t) if t <= tau else 0.0
    w = g_tilde - cos_phi
    du = -1j * J * (w * u - sin_phi * v)
    dv = 1j * J * (sin_phi * u + w * v)
    return np.concatenate([du, dv])


def log_decay(t, params: ChainParams):
    """
    ln |exp(-i int_0^t eps0 dt')| = -J int_0^t delta(t') dt', the norm lost to the decay term.

    The mode equations leave out the common factor exp(-i int eps0 dt); its phase stays dropped,
    its modulus is applied to every stored amplitude. With it |u|^2 + |v|^2 obeys
    d/dt (|u|^2 + |v|^2) = -4 J delta(t) |v|^2 and never grows.
    """
    t_arr = np.minimum(np.asarray(t, dtype=float), params.tau)
    return -params.J * params.delta * (t_arr - t_arr**2 / (2.0 * params.tau))


def _has_ramp(params: ChainParams) -> bool:
    return params.g != 0.0 or params.delta != 0.0


def initial_amplitudes(modes: Sequence[Mode], params: ChainParams, initial_state: InitialState = "ground_branch"):
    """
    Diabatic start: (u, v) = (0, -1) for every mode.
    Adiabatic start: (cot(theta0 / 2), -1), the exact instantaneous ground state at t = 0.
    Ground-branch start: the ground-connected parabolic-cylinder solution at t = 0, scaled to unit
    norm with v real and negative. Without a ramp it is the adiabatic start.
    """
    m = len(modes)
    u0 = np.zeros(m, dtype=complex)
    v0 = -np.ones(m, dtype=complex)
    if initial_state == "ground_branch" and _has_ramp(params):
        ratio = np.array([ground_branch_ratio(mode, params, 0.0) for mode in modes], dtype=complex)
        v0 = v0 / np.sqrt(1.0 + np.abs(ratio) ** 2)
        return ratio * v0, v0
    if initial_state != "diabatic":
        theta0 = ground_bloch_angles([mode.phi for mode in modes], np.array([params.gamma * params.tau]))[:, 0]
        u0 = np.cos(theta0 / 2) / np.sin(theta0 / 2)
    return u0, v0


def _tracked_theta(modes: Sequence[Mode], params: ChainParams, times: np.ndarray, points: int) -> np.ndarray:
    grid = np.union1d(times, np.linspace(0.0, params.tau, points))
    theta = ground_bloch_angles([mode.phi for mode in modes], g_tilde_at(grid, params))
    return theta[:, np.searchsorted(grid, times)]


def project_arrays(u, v, theta):
    """Vectorised form of `to_adiabatic`."""
    half_cos, half_sin = np.cos(theta / 2), np.sin(theta / 2)
    return u * half_cos - v * half_sin, v * half_cos + u * half_sin


def probability_arrays(alpha, beta, k: float = math.nan) -> np.ndarray:
    """Vectorised form of `intrinsic_probability`."""
    a, b = np.abs(alpha), np.abs(beta)
    if np.any((a < DEGENERATE_NORM) & (b < DEGENERATE_NORM)):
        raise DegenerateStateError(f"Both adiabatic amplitudes of mode k={k} decayed below {DEGENERATE_NORM}")
    # squares of amplitudes near 1e-300 underflow
    scale = np.maximum(a, b)
    a2, b2 = (a / scale) ** 2, (b / scale) ** 2
    return np.clip(a2 / (a2 + b2), 0.0, 1.0)


def _solve(modes: Sequence[Mode], params: ChainParams, span, y0, t_eval, options: IntegratorOptions) -> np.ndarray:
    cos_phi = np.array([mode.cos_phi for mode in modes])
    sin_phi = np.array([mode.sin_phi for mode in modes])
    solution = solve_ivp(
        _schroedinger_rhs,
        span,
        y0,
        method=options.method,
        t_eval=t_eval,
        rtol=options.rtol,
        atol=options.atol,
        args=(cos_phi, sin_phi, params.J, params.gamma, params.tau),
    )
    if solution.status != 0 or solution.y.shape[1] != len(t_eval):
        t_fail = float(solution.t[-1]) if solution.t.size else float(span[0])
        raise IntegrationError(solution.message, t=t_fail, k=modes[0].k)
    if not np.all(np.isfinite(solution.y)):
        raise IntegrationError("Amplitudes left the floating-point range", t=float(span[1]), k=modes[0].k)
    return solution.y


def _integrate_ground_branch(modes: Sequence[Mode], params: ChainParams, times: np.ndarray, options: IntegratorOptions):
    """
    Starts from the closed-form ground-branch ratio at the last sample and integrates back to
    t = 0. Going backwards an excited admixture shrinks instead of growing, so the solution
    stays on the ground branch; it is then scaled to unit norm at t = 0 with v(0) real and negative.
    """
    m = len(modes)
    t_end = float(times[-1])
    u_end = np.array([ground_branch_ratio(mode, params, t_end) for mode in modes], dtype=complex)
    v_end = np.ones(m, dtype=complex)
    t_eval = times[::-1] if times[0] == 0.0 else np.append(times[::-1], 0.0)
    y = _solve(modes, params, (t_end, 0.0), np.concatenate([u_end, v_end]), t_eval, options)[:, ::-1]
    u, v = y[:m], y[m:]

    u_start, v_start = u[:, 0], v[:, 0]
    norm = np.sqrt(np.abs(u_start) ** 2 + np.abs(v_start) ** 2)
    phase = np.where(v_start != 0, np.abs(v_start) / np.where(v_start != 0, v_start, 1.0), 1.0)
    scale = (-phase / norm)[:, None]
    if times[0] != 0.0:
        u, v = u[:, 1:], v[:, 1:]
    return u * scale, v * scale


def _integrate(modes: Sequence[Mode], params: ChainParams, times: np.ndarray, options: IntegratorOptions):
    """Amplitudes of the mode equations at `times`, without the decay factor."""
    t_end = max(float(times[-1]), 0.0)
    if t_end > 0.0 and options.initial_state == "ground_branch" and _has_ramp(params):
        return _integrate_ground_branch(modes, params, times, options)

    u0, v0 = initial_amplitudes(modes, params, options.initial_state)
    if t_end == 0.0:
        return np.tile(u0[:, None], (1, times.size)), np.tile(v0[:, None], (1, times.size))
    y = _solve(modes, params, (0.0, t_end), np.concatenate([u0, v0]), times, options)
    m = len(modes)
    return y[:m], y[m:]


def _check_norm_decreases(norm: np.ndarray, mode: Mode, times: np.ndarray, rtol: float) -> None:
    tolerance = max(1e-6, 100.0 * rtol)
    growth = np.diff(norm) - tolerance * norm[:-1]
    if np.any(growth > 0):
        i = int(np.argmax(growth))
        raise IntegrationError(
            f"Norm grew from {norm[i]:.6e} to {norm[i + 1]:.6e}", t=float(times[i + 1]), k=mode.k
        )


def evolve_modes(
    modes: Sequence[Mode],
    params: ChainParams,
    sample_times: Optional[Sequence[float]] = None,
    options: Optional[IntegratorOptions] = None,
) -> List[ModeTrajectory]:
    """
    Integrates a batch of modes from the initial state to the last sample time.

    Probabilities are taken before the decay factor is applied, so they stay defined after the
    stored amplitudes have decayed out of range. If the batch fails, each mode is retried on its
    own so that the reported error names the mode that actually broke.
    """
    options = options or IntegratorOptions()
    times = _check_sample_times(
        default_sample_times(params) if sample_times is None else sample_times, params
    )
    modes = list(modes)
    try:
        u, v = _integrate(modes, params, times, options)
    except IntegrationError:
        if len(modes) == 1:
            raise
        return [trajectory for mode in modes for trajectory in evolve_modes([mode], params, times, options)]

    theta = _tracked_theta(modes, params, times, options.tracking_points)
    alpha, beta = project_arrays(u, v, theta)
    decay = np.exp(log_decay(times, params))
    trajectories = []
    for row, mode in enumerate(modes):
        p_gs = probability_arrays(alpha[row], beta[row], mode.k)
        u_row, v_row = u[row] * decay, v[row] * decay
        _check_norm_decreases(np.abs(u_row) ** 2 + np.abs(v_row) ** 2, mode, times, options.rtol)
        trajectories.append(
            ModeTrajectory(
                mode=mode, N=params.N, t=times, u=u_row, v=v_row,
                alpha=alpha[row] * decay, beta=beta[row] * decay, theta=theta[row], p_gs=p_gs,
            )
        )
    return trajectories


def evolve_mode(
    mode: Mode,
    params: ChainParams,
    sample_times: Optional[Sequence[float]] = None,
    options: Optional[IntegratorOptions] = None,
) -> ModeTrajectory:
    return evolve_modes([mode], params, sample_times, options)[0]


def to_adiabatic(amps: ModeAmplitudes, theta: complex) -> AdiabaticProjection:
    """alpha = u cos(theta/2) - v sin(theta/2), beta = v cos(theta/2) + u sin(theta/2)."""
    alpha, beta = project_arrays(amps.u, amps.v, complex(theta))
    return AdiabaticProjection(alpha=complex(alpha), beta=complex(beta), theta=complex(theta))


def from_adiabatic(proj: AdiabaticProjection, t: float = 0.0) -> ModeAmplitudes:
    """Inverse rotation of `to_adiabatic`."""
    half_cos, half_sin = np.cos(proj.theta / 2), np.sin(proj.theta / 2)
    u = proj.alpha * half_cos + proj.beta * half_sin
    v = proj.beta * half_cos - proj.alpha * half_sin
    return ModeAmplitudes(u=complex(u), v=complex(v), t=t)


def intrinsic_probability(proj: AdiabaticProjection) -> float:
    """|alpha|^2 / (|alpha|^2 + |beta|^2)."""
    return float(probability_arrays(np.array([proj.alpha]), np.array([proj.beta]))[0])


def log_system_probability(probabilities: Iterable[float]) -> float:
    total = 0.0
    for value in probabilities:
        if value <= 0.0:
            return -math.inf
        total += math.log(value)
    return total


def _complete_in_order(trajs: Iterable[ModeTrajectory] | Mapping[int, ModeTrajectory]) -> List[ModeTrajectory]:
    trajectories = list(trajs.values()) if isinstance(trajs, Mapping) else list(trajs)
    if not trajectories:
        raise IncompleteModeSetError("No mode trajectories were supplied")
    N = trajectories[0].N
    indices = sorted(traj.mode.index for traj in trajectories)
    if indices != list(range(1, N // 2 + 1)):
        missing = sorted(set(range(1, N // 2 + 1)) - set(indices))
        raise IncompleteModeSetError(
            f"System probability needs all {N // 2} modes; missing indices {missing[:10]}"
        )
    return sorted(trajectories, key=lambda traj: traj.mode.index)


def system_ground_probability(trajs: Iterable[ModeTrajectory] | Mapping[int, ModeTrajectory], t: float) -> float:
    """
    Product of P_gs_k(t) over the stored positive-k modes, accumulated in log space.
    Every mode index 1..N/2 must be present exactly once.
    """
    ordered = _complete_in_order(trajs)
    try:
        values = [float(traj.p_gs[traj.index_of(t)]) for traj in ordered]
    except KeyError as error:
        raise IncompleteModeSetError(str(error)) from error
    return math.exp(log_system_probability(values))


def system_probability_series(trajs: Iterable[ModeTrajectory] | Mapping[int, ModeTrajectory]) -> np.ndarray:
    """System ground-state probability at every shared sample time, in mode order."""
    ordered = _complete_in_order(trajs)
    stacked = np.vstack([traj.p_gs for traj in ordered])
    with np.errstate(divide="ignore"):
        return np.exp(np.sum(np.log(stacked), axis=0))
