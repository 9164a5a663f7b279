"""
Closed-form side of the quench: the parabolic-cylinder solution of the mode equations,
Landau-Zener and dissipative transition formulas, and annealing-time estimators.
"""
import cmath
import math
from typing import Optional

import numpy as np
from scipy import optimize

from nqa_engine.domain.errors import InternalConsistencyError, ParameterError, UnreachableTargetError
from nqa_engine.domain.model import ground_branch_ratio, weber_nu, weber_z
from nqa_engine.domain.quench import (
    InitialState,
    initial_amplitudes,
    log_decay,
    probability_arrays,
    project_arrays,
)
from nqa_engine.domain.special_functions import parabolic_cylinder_D_or_reference
from nqa_engine.domain.value_objects import (
    ChainParams,
    Mode,
    ModeAmplitudes,
    ModeProbabilityEstimate,
    ScalingEstimate,
    SystemProbabilityEstimate,
    WeberParams,
)

# Largest |residual| of the fitted solution at t = 0.
FIT_TOLERANCE = 1e-8


class ExactSolution:
    """
    Parabolic-cylinder solution of one mode,

        u = A sqrt(i nu) D_{-i nu - 1}(z) + B D_{i nu}(i z)
        v = A D_{-i nu}(z)                - B i sqrt(i nu) D_{i nu - 1}(i z),

    multiplied by the decay factor that `evolve_modes` applies. The ground-branch start keeps
    B = 0 and scales A to unit norm at t = 0 with v(0) real and negative. Other starts fit A and
    B to the initial amplitudes; the two basis columns differ in size by many orders of magnitude
    once Re nu is large, so each is scaled to unit length before the solve.
    """

    def __init__(self, mode: Mode, params: ChainParams, initial_state: InitialState = "ground_branch"):
        self.mode = mode
        self.params = params
        self.initial_state = initial_state
        self.nu = weber_nu(mode, params)
        self._root_inu = cmath.sqrt(1j * self.nu)
        self.z0 = weber_z(0.0, mode, params)
        self.z_tau = weber_z(params.tau, mode, params)

        first_u, first_v, second_u, second_v = self._basis(self.z0, second=initial_state != "ground_branch")
        if initial_state == "ground_branch":
            if first_v == 0:
                raise InternalConsistencyError(f"D_(-i nu)(z0) vanishes for mode k={mode.k}")
            self.A = -(abs(first_v) / first_v) / math.hypot(abs(first_u), abs(first_v))
            self.B = 0j
            return

        u0, v0 = (complex(x[0]) for x in initial_amplitudes([mode], params, initial_state))
        matrix = np.array([[first_u, second_u], [first_v, second_v]], dtype=complex)
        lengths = np.linalg.norm(matrix, axis=0)
        if not np.all(np.isfinite(matrix)) or np.any(lengths == 0):
            raise InternalConsistencyError(f"Unusable parabolic-cylinder basis at z0={self.z0} for k={mode.k}")
        scaled = np.linalg.solve(matrix / lengths, np.array([u0, v0]))
        self.A, self.B = (complex(c) for c in scaled / lengths)

        residual = max(
            abs(self.A * first_u + self.B * second_u - u0),
            abs(self.A * first_v + self.B * second_v - v0),
        )
        if not residual <= FIT_TOLERANCE:
            raise InternalConsistencyError(
                f"Parabolic-cylinder fit misses the initial state of mode k={mode.k} by {residual:.2e}"
            )

    def _basis(self, z: complex, second: bool = True) -> tuple[complex, complex, complex, complex]:
        order = -1j * self.nu
        first_u = self._root_inu * parabolic_cylinder_D_or_reference(order - 1, z)
        first_v = parabolic_cylinder_D_or_reference(order, z)
        if not second:
            return first_u, first_v, 0j, 0j
        second_u = parabolic_cylinder_D_or_reference(-order, 1j * z)
        second_v = -1j * self._root_inu * parabolic_cylinder_D_or_reference(-order - 1, 1j * z)
        return first_u, first_v, second_u, second_v

    @property
    def weber(self) -> WeberParams:
        return WeberParams(nu=self.nu, z0=self.z0, z_tau=self.z_tau, A=self.A, B=self.B)

    def at(self, t: float) -> ModeAmplitudes:
        first_u, first_v, second_u, second_v = self._basis(
            weber_z(t, self.mode, self.params), second=self.initial_state != "ground_branch"
        )
        decay = math.exp(float(log_decay(t, self.params)))
        return ModeAmplitudes(
            u=(self.A * first_u + self.B * second_u) * decay,
            v=(self.A * first_v + self.B * second_v) * decay,
            t=t,
        )

    def final_probability(self) -> float:
        """Intrinsic ground-state probability at t = tau, where the ground state has theta = -phi."""
        final = self.at(self.params.tau)
        alpha, beta = project_arrays(final.u, final.v, -self.mode.phi)
        return float(probability_arrays(np.array([alpha]), np.array([beta]), self.mode.k)[0])


def weber_params(mode: Mode, params: ChainParams) -> WeberParams:
    return ExactSolution(mode, params).weber


def exact_uv(
    mode: Mode, t: float, params: ChainParams, initial_state: InitialState = "ground_branch"
) -> tuple[complex, complex]:
    amplitudes = ExactSolution(mode, params, initial_state).at(t)
    return amplitudes.u, amplitudes.v


def ground_branch_probability(mode: Mode, params: ChainParams) -> float:
    """
    Final intrinsic ground-state probability of the ground-connected solution. Only the u / v
    ratio at t = tau enters, so no decay factor or normalisation can over- or underflow.
    """
    ratio = ground_branch_ratio(mode, params, params.tau)
    alpha, beta = project_arrays(ratio, 1.0, -mode.phi)
    return float(probability_arrays(np.array([alpha]), np.array([beta]), mode.k)[0])


def weber_final_probability(
    mode: Mode,
    params: ChainParams,
    initial_state: InitialState = "ground_branch",
) -> float:
    if initial_state == "ground_branch":
        return ground_branch_probability(mode, params)
    return ExactSolution(mode, params, initial_state).final_probability()


def _transition_probability(x: float, y: float) -> float:
    """(1 - e^{-x}) / (1 - e^{-x} + e^{-x-y}) for x, y >= 0."""
    if math.isinf(x):
        return 1.0
    adiabatic = -math.expm1(-x)
    leak = math.exp(-x - y)
    if adiabatic + leak == 0.0:
        return 0.0
    return adiabatic / (adiabatic + leak)


def lz_probability_hermitian(mode: Mode, params: ChainParams) -> float:
    """Landau-Zener value 1 - exp(-pi J tau sin^2(phi_k) / g); uses g only."""
    if params.g == 0.0:
        return 1.0
    return -math.expm1(-math.pi * params.J * params.tau * mode.sin_phi**2 / params.g)


def nqa_mode_probability(mode: Mode, params: ChainParams) -> ModeProbabilityEstimate:
    """
    Final ground-state probability of one mode in the small-delta convention:
    2 pi Re nu = pi J tau sin^2(phi) / g and Re z^2(tau) = 2 J delta tau / g^2.
    At delta = 0 it coincides with `lz_probability_hermitian`.
    """
    long_wavelength = mode.phi < math.pi / 4
    if params.g == 0.0:
        return ModeProbabilityEstimate(value=1.0, long_wavelength=long_wavelength)
    x = math.pi * params.J * params.tau * mode.sin_phi**2 / params.g
    value = _transition_probability(x, params.decay_exponent)
    return ModeProbabilityEstimate(value=value, long_wavelength=long_wavelength)


def lowest_mode_exponent(params: ChainParams) -> float:
    return 2.0 * math.pi * params.tau / params.tau0


def system_probability_estimate(params: ChainParams) -> SystemProbabilityEstimate:
    """
    Lowest-mode estimate of the whole-system ground-state probability, with x = 2 pi tau / tau0
    and y = 2 J delta tau / g^2:

        full       (1 - e^{-x}) / (1 - e^{-x} + e^{-x-y})
        small_tau  1 / (1 + e^{-y} / x)
        near_unity 1 - e^{-y} / x

    `condition` is y - ln(1/x); near_unity is trustworthy when it is large.
    """
    if params.g == 0.0:
        return SystemProbabilityEstimate(full=1.0, small_tau=1.0, near_unity=1.0, condition=math.inf)
    x = lowest_mode_exponent(params)
    y = params.decay_exponent
    return SystemProbabilityEstimate(
        full=_transition_probability(x, y),
        small_tau=x / (x + math.exp(-y)),
        near_unity=1.0 - math.exp(-y) / x,
        condition=y + math.log(x),
    )


def annealing_time_estimate(N: int, params: ChainParams, target: float) -> ScalingEstimate:
    """
    Smallest tau whose lowest-mode estimate reaches `target`.

    Hermitian chains invert the closed form, tau = -tau0 ln(1 - target) / (2 pi). Dissipative
    chains bisect on [1, tau0] and also report the logarithmic estimate (g^2 / 2 J delta) ln N.
    """
    if not 0.0 < target < 1.0:
        raise ParameterError(f"target must lie strictly between 0 and 1, got {target}")
    sized = params.with_size(N)
    tau0 = sized.tau0
    if sized.g == 0.0:
        raise ParameterError("Annealing-time estimates need g > 0")

    if sized.is_hermitian:
        return ScalingEstimate(N=N, tau0=tau0, tau_star=-tau0 * math.log1p(-target) / (2.0 * math.pi), target=target)

    def shortfall(tau: float) -> float:
        return system_probability_estimate(sized.with_tau(tau)).full - target

    upper_value = shortfall(tau0)
    if upper_value < 0:
        raise UnreachableTargetError(
            f"Target {target} is not reached by tau0={tau0:.6g} for N={N}",
            target=target,
            best=upper_value + target,
        )
    lower = min(1.0, tau0)
    xtol = 1e-6 * tau0
    if shortfall(lower) >= 0:
        tau_star = lower
    else:
        tau_star = optimize.bisect(shortfall, lower, tau0, xtol=xtol)
        if shortfall(tau_star) < 0:
            tau_star = min(tau_star + xtol, tau0)
    return ScalingEstimate(
        N=N,
        tau0=tau0,
        tau_star=tau_star,
        tau_nqa=logarithmic_time_estimate(N, sized),
        target=target,
    )


def logarithmic_time_estimate(N: int, params: ChainParams) -> Optional[float]:
    """(g^2 / 2 J delta) ln N, or None for a Hermitian chain."""
    if params.is_hermitian:
        return None
    return params.g**2 / (2.0 * params.J * params.delta) * math.log(N)
