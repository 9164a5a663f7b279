"""
Momentum-space picture of the dissipative antiferromagnetic Ising chain.

Every stored mode k > 0 represents the two-dimensional subspace spanned by
|0>_k|0>_{-k} and |1>_k|1>_{-k}; in that subspace the chain reduces to the
2x2 complex-symmetric Hamiltonian built by `mode_hamiltonian`.
"""
import cmath
import math
from typing import Optional, Sequence

import mpmath
import numpy as np
from mpmath.libmp import NoConvergence

from nqa_engine.domain.errors import (
    BranchTrackingError,
    InternalConsistencyError,
    ParameterError,
    ParameterRegionError,
)
from nqa_engine.domain.special_functions import parabolic_cylinder_D
from nqa_engine.domain.value_objects import ChainParams, ComplexCoupling, Mode, ModeGrid

_EIGHTH_TURN = cmath.exp(0.25j * math.pi)
# |theta + phi| allowed at g~ = 0 once the ground branch is picked
_FINAL_ANGLE_TOLERANCE = 1e-6


def mode_grid(N: int) -> ModeGrid:
    """Returns the antiperiodic momenta k = 1/2, 3/2, ..., (N-1)/2 and phi_k = 2 pi k / N."""
    if isinstance(N, bool) or int(N) != N or N < 4 or N % 2:
        raise ParameterError(f"N must be an even integer >= 4, got {N!r}")
    N = int(N)
    modes = tuple(
        Mode(index=m, k=m - 0.5, phi=2.0 * math.pi * (m - 0.5) / N)
        for m in range(1, N // 2 + 1)
    )
    return ModeGrid(N=N, modes=modes)


def g_tilde_at(t, params: ChainParams):
    """Vectorised g~(t); accepts scalars or numpy arrays."""
    t_arr = np.asarray(t, dtype=float)
    return np.where(t_arr <= params.tau, params.gamma * (params.tau - t_arr), 0.0 + 0.0j)


def schedule_g(t: float, params: ChainParams) -> ComplexCoupling:
    """Linear ramp g~(t) = gamma (tau - t) on [0, tau], zero afterwards."""
    if t < 0:
        raise ParameterError(f"Schedule time must be non-negative, got {t}")
    value = params.gamma * (params.tau - t) if t <= params.tau else 0j
    return ComplexCoupling(t=t, g_tilde=complex(value), gamma=params.gamma)


def mode_hamiltonian(mode: Mode, g_tilde: complex, J: float) -> np.ndarray:
    """
    eps0 * 1 - J [[g~ - cos phi, sin phi], [sin phi, -g~ + cos phi]],
    with eps0 = J cos phi - i J delta(t) and delta(t) = Im g~(t).
    """
    c, s = mode.cos_phi, mode.sin_phi
    w = g_tilde - c
    eps0 = J * c - 1j * J * g_tilde.imag
    return eps0 * np.eye(2, dtype=complex) - J * np.array([[w, s], [s, -w]], dtype=complex)


def _root(mode: Mode, g_tilde: complex) -> complex:
    return complex(np.sqrt(complex(g_tilde * g_tilde - 2.0 * g_tilde * mode.cos_phi + 1.0)))


def spectrum(mode: Mode, g_tilde: complex, J: float) -> tuple[complex, complex]:
    """Both branches eps0 +- eps_k, with eps_k = J sqrt(g~^2 - 2 g~ cos phi + 1) on the principal root."""
    eps0 = J * mode.cos_phi - 1j * J * g_tilde.imag
    eps_k = J * _root(mode, g_tilde)
    return eps0 + eps_k, eps0 - eps_k


def _angle_from_root(cos_phi, sin_phi, g_tilde, root):
    cos_theta = (cos_phi - g_tilde) / root
    sin_theta = -sin_phi / root
    return -1j * np.log(cos_theta + 1j * sin_theta)


def bloch_angle(mode: Mode, g_tilde: complex, previous: Optional[complex] = None) -> complex:
    """
    Complex Bloch angle with cos(theta) = (cos phi - g~)/root and sin(theta) = -sin phi/root.
    Without `previous` the principal root is used; with it, the branch (theta + n pi) closest
    to `previous` is returned.
    """
    root = _root(mode, g_tilde)
    if root == 0:
        raise BranchTrackingError(f"Exceptional point reached for k={mode.k} at g~={g_tilde}")
    theta = complex(_angle_from_root(mode.cos_phi, mode.sin_phi, g_tilde, root))
    if previous is None:
        return theta
    shift = round((previous.real - theta.real) / math.pi)
    theta += shift * math.pi
    if abs(theta - previous) > math.pi / 2:
        raise BranchTrackingError(
            f"Bloch angle of mode k={mode.k} jumped from {previous} to {theta}"
        )
    return theta


def _continued_angles(phis: Sequence[float], g_tilde: np.ndarray):
    phi = np.asarray(phis, dtype=float)[:, None]
    gt = np.asarray(g_tilde, dtype=complex).ravel()[None, :]
    c, s = np.cos(phi), np.sin(phi)

    principal = np.sqrt(gt * gt - 2.0 * gt * c + 1.0)
    if np.any(principal == 0):
        raise BranchTrackingError("Exceptional point reached on the tracking grid")
    root = principal
    if root.shape[1] > 1:
        overlap = np.real(root[:, 1:] * np.conj(root[:, :-1]))
        flips = np.where(overlap < 0, -1.0, 1.0)
        signs = np.concatenate([np.ones((root.shape[0], 1)), np.cumprod(flips, axis=1)], axis=1)
        root = root * signs

    theta = _angle_from_root(c, s, gt, root)
    theta = np.unwrap(theta.real, axis=1) + 1j * theta.imag
    if theta.shape[1] > 1:
        jumps = np.abs(np.diff(theta, axis=1))
        if np.any(jumps > math.pi / 2):
            row, col = np.unravel_index(np.argmax(jumps), jumps.shape)
            raise BranchTrackingError(
                f"Bloch angle jumped by {jumps[row, col]:.3f} at step {col} of mode row {row}"
            )
    return theta, root, principal


def track_bloch_angles(phis: Sequence[float], g_tilde: np.ndarray) -> np.ndarray:
    """
    Continuous Bloch angles along a trajectory of g~ values.

    Returns an array of shape (len(phis), len(g_tilde)). The root is principal at the first
    point and afterwards follows the sign closest to its predecessor; the angle is unwrapped.
    """
    return _continued_angles(phis, g_tilde)[0]


def ground_bloch_angles(phis: Sequence[float], g_tilde: np.ndarray) -> np.ndarray:
    """
    Bloch angles of the instantaneous ground state along a trajectory of g~ values.

    The ground state is the eigenvector whose energy has the lower real part, which is the one
    built on the principal root. The continued angle of `track_bloch_angles` is shifted by pi
    wherever the continued root has turned into minus the principal one; for modes whose ramp
    passes the exceptional point on the far side this happens once, where the real parts of the
    two energies cross. When the trajectory reaches g~ = 0 every row is brought to
    theta = -phi there, and a row that cannot be is reported as a tracking failure.
    """
    theta, root, principal = _continued_angles(phis, g_tilde)
    swapped = np.real(root * np.conj(principal)) < 0
    theta = theta + np.where(swapped, math.pi, 0.0)

    at_zero = np.flatnonzero(np.asarray(g_tilde, dtype=complex).ravel() == 0)
    if at_zero.size:
        column = int(at_zero[0])
        phi = np.asarray(phis, dtype=float)
        turns = np.round((theta[:, column].real + phi) / (2.0 * math.pi))
        theta = theta - 2.0 * math.pi * turns[:, None]
        miss = np.abs(theta[:, column] + phi)
        if np.any(miss > _FINAL_ANGLE_TOLERANCE):
            row = int(np.argmax(miss))
            raise BranchTrackingError(
                f"Ground-state angle of mode row {row} ends at {theta[row, column]:.6f}, "
                f"not at -phi = {-phi[row]:.6f}"
            )
    return theta


def _require_ramp(params: ChainParams) -> None:
    if params.g == 0.0 and params.delta == 0.0:
        raise ParameterError("The parabolic-cylinder solution needs g + i delta != 0")


def weber_nu(mode: Mode, params: ChainParams) -> complex:
    """nu_k = J sin^2(phi_k) / (2 gamma)."""
    _require_ramp(params)
    return params.J * mode.sin_phi**2 / (2.0 * params.gamma)


def weber_z(t: float, mode: Mode, params: ChainParams) -> complex:
    """z_k(t) = e^{i pi/4} sqrt(2J/gamma) (g~(t) - cos phi_k), defined on [0, tau]."""
    _require_ramp(params)
    if t < 0 or t > params.tau * (1 + 1e-12):
        raise ParameterError(f"The closed form covers 0 <= t <= tau, got t={t}")
    scale = _EIGHTH_TURN * cmath.sqrt(2.0 * params.J / params.gamma)
    return scale * (complex(g_tilde_at(min(t, params.tau), params)) - mode.cos_phi)


def ground_branch_ratio(mode: Mode, params: ChainParams, t: float) -> complex:
    """
    u / v of the ground-connected solution at time t,

        sqrt(i nu) D_{-i nu - 1}(z) / D_{-i nu}(z),

    the parabolic-cylinder solution that carries no excited-branch admixture into the
    crossing. Where `parabolic_cylinder_D` declines the arguments, or its values overflow,
    the ratio is taken from mpmath.
    """
    nu = weber_nu(mode, params)
    z = weber_z(t, mode, params)
    order = -1j * nu
    try:
        ratio = cmath.sqrt(1j * nu) * parabolic_cylinder_D(order - 1, z) / parabolic_cylinder_D(order, z)
    except (ParameterRegionError, InternalConsistencyError, ZeroDivisionError, OverflowError):
        ratio = complex(math.nan, math.nan)
    if cmath.isfinite(ratio):
        return ratio

    try:
        with mpmath.workdps(30):
            ratio = complex(mpmath.sqrt(1j * nu) * mpmath.pcfd(order - 1, z) / mpmath.pcfd(order, z))
    except (NoConvergence, ZeroDivisionError) as error:
        raise ParameterRegionError(f"No ground-branch ratio for k={mode.k} at t={t}: {error}") from error
    if not cmath.isfinite(ratio):
        raise ParameterRegionError(f"Ground-branch ratio of mode k={mode.k} is not finite at t={t}")
    return ratio


def minimum_gap(mode: Mode, params: ChainParams, points: int = 4001) -> float:
    """Smallest |eps_+ - eps_-| = 2 J |root| along the schedule, sampled on a uniform grid."""
    t = np.linspace(0.0, params.tau, points)
    gt = g_tilde_at(t, params)
    gap = 2.0 * params.J * np.abs(np.sqrt(gt * gt - 2.0 * gt * mode.cos_phi + 1.0))
    return float(gap.min())
