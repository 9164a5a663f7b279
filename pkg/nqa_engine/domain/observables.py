"""
Observables of the final state: Wick pairings, Toeplitz spin correlators, the Kibble-Zurek
scale and defect statistics.

Pairings are discrete sums over the full antiperiodic grid. Stored modes carry k > 0; the
partner -k has u_{-k} = -u_k and v_{-k} = v_k, so its summand is the complex conjugate of
the stored one. G_p uses the bond offset e^{i(p-1) phi_k}, which makes the ground state of
the classical chain give G_0 = -1 and G_{p != 0} = 0.
"""
import math
import warnings
from typing import Dict, Mapping, Optional

import numpy as np
from scipy import integrate, linalg, optimize

from nqa_engine.domain.analytic import lowest_mode_exponent
from nqa_engine.domain.entities import CorrelationTable, DefectReport, FinalState
from nqa_engine.domain.errors import (
    DegenerateStateError,
    DeterminantValidityError,
    ParameterError,
    QuadratureError,
)
from nqa_engine.domain.model import mode_grid
from nqa_engine.domain.quench import DEGENERATE_NORM
from nqa_engine.domain.special_functions import lerch_phi
from nqa_engine.domain.value_objects import ChainParams, DefectEstimate

DETERMINANT_BUDGET = 256
IMAGINARY_RESIDUE = 1e-8
ENVELOPE_RATE = 0.174
OSCILLATION_RATE = math.sqrt(math.log(2.0) / (2.0 * math.pi))
GAUSSIAN_THRESHOLD = 3.0


def eigenstate_finals(N: int, excited: bool = False) -> FinalState:
    """
    Final state in which every mode sits in the ground (or excited) eigenstate of the
    classical chain, where the Bloch angle is -phi_k.
    """
    phis = np.array(mode_grid(N).phis)
    half = phis / 2
    if excited:
        u, v, p_gs = -np.sin(half), np.cos(half), np.zeros_like(phis)
    else:
        u, v, p_gs = np.cos(half), np.sin(half), np.ones_like(phis)
    return FinalState(N=N, phis=phis, u=u.astype(complex), v=v.astype(complex), p_gs=p_gs)


def _weights(finals: FinalState) -> tuple[np.ndarray, np.ndarray]:
    finals.check_complete()
    # decayed amplitudes are rescaled first; their squares can underflow
    scale = np.maximum(np.abs(finals.u), np.abs(finals.v))
    if np.any(scale < DEGENERATE_NORM):
        raise DegenerateStateError("A mode of the final state has decayed below the representable range")
    u, v = finals.u / scale, finals.v / scale
    norm = np.abs(u) ** 2 + np.abs(v) ** 2
    cross = u * np.conj(v)
    f = (np.abs(v) ** 2 - np.abs(u) ** 2 - 2j * cross.real) / norm
    return f, cross / norm


def _check_offset(p: int, N: int) -> None:
    if not -N // 2 < p < N // 2:
        raise ParameterError(f"Pairing offset must satisfy -N/2 < p < N/2, got p={p} for N={N}")


def pairing_G(p: int, finals: FinalState) -> complex:
    """G_p = (1/N) sum over +-k of f_k e^{i(p-1) phi_k}."""
    _check_offset(p, finals.N)
    f, _ = _weights(finals)
    phase = np.exp(1j * (p - 1) * finals.phis)
    return complex(np.sum(f * phase + np.conj(f) * np.conj(phase)) / finals.N)


def pairing_beta(p: int, finals: FinalState) -> complex:
    """beta_p = (1/iN) sum over +-k of u v* e^{i p phi_k} / (|u|^2 + |v|^2)."""
    _check_offset(p, finals.N)
    _, cross = _weights(finals)
    return complex(2.0 * np.sum(cross * np.sin(p * finals.phis)) / finals.N)


def pairing_table(finals: FinalState, max_p: int, with_beta: bool = True) -> CorrelationTable:
    """Pairings for every offset a determinant of order max_p needs."""
    if max_p < 1:
        raise ParameterError(f"max_p must be at least 1, got {max_p}")
    f, cross = _weights(finals)
    G: Dict[int, complex] = {}
    for p in range(-(max_p - 1), max_p + 1):
        if p == max_p and p >= finals.N // 2:
            continue
        _check_offset(p, finals.N)
        phase = np.exp(1j * (p - 1) * finals.phis)
        G[p] = complex(np.sum(f * phase + np.conj(f) * np.conj(phase)) / finals.N)
    im_beta = {}
    if with_beta:
        im_beta = {
            p: float(2.0 * np.sum(cross.imag * np.sin(p * finals.phis)) / finals.N)
            for p in range(0, max_p + 1)
            if p < finals.N // 2
        }
    return CorrelationTable(G=G, im_beta=im_beta)


def ground_state_table(max_p: int) -> CorrelationTable:
    """Exact pairings of the classical ground state: G_0 = -1, all others zero."""
    return CorrelationTable(
        G={p: (-1.0 + 0j if p == 0 else 0j) for p in range(-(max_p - 1), max_p + 1)},
        im_beta={p: 0.0 for p in range(0, max_p + 1)},
    )


def correlation_chi(p: int, table: CorrelationTable, budget: int = DETERMINANT_BUDGET) -> float:
    """Determinant of the p x p Toeplitz matrix M[i, j] = G_{i-j}, by LU with partial pivoting."""
    if p < 1:
        raise ParameterError(f"Correlation distance must be at least 1, got {p}")
    if p > budget:
        raise ParameterError(f"Correlation distance {p} exceeds the determinant budget {budget}")
    missing = [j for j in range(-(p - 1), p) if j not in table.G]
    if missing:
        raise ParameterError(f"Pairings {missing[:5]} are needed for chi({p})")

    column = [table.G[j] for j in range(p)]
    row = [table.G[-j] for j in range(p)]
    matrix = linalg.toeplitz(column, row)
    lu, pivots = linalg.lu_factor(matrix, check_finite=True)
    swaps = int(np.count_nonzero(pivots != np.arange(p)))
    det = np.prod(np.diag(lu)) * (-1) ** swaps
    if abs(det.imag) > IMAGINARY_RESIDUE:
        raise DeterminantValidityError(f"chi({p}) has imaginary part {det.imag:.3e}")
    return float(det.real)


def kz_length(params: ChainParams) -> float:
    """xi = sqrt(J tau / 2g)."""
    if params.g == 0.0:
        raise ParameterError("The Kibble-Zurek length needs g > 0")
    return math.sqrt(params.J * params.tau / (2.0 * params.g))


def domain_size(params: ChainParams) -> float:
    """L = pi xi sqrt(2 pi / ln 2)."""
    return math.pi * kz_length(params) * math.sqrt(2.0 * math.pi / math.log(2.0))


def chi_asymptotic(p: int, params: ChainParams, phi0: float = 0.0) -> float:
    """(-1)^p exp(-0.174 p / xi) cos(sqrt(ln2 / 2pi) p / xi + phi0)."""
    if p < 1:
        raise ParameterError(f"Correlation distance must be at least 1, got {p}")
    xi = kz_length(params)
    return (-1) ** p * math.exp(-ENVELOPE_RATE * p / xi) * math.cos(OSCILLATION_RATE * p / xi + phi0)


def predicted_period(params: ChainParams) -> float:
    """Oscillation period 2 pi xi / sqrt(ln2 / 2pi) of (-1)^p chi(p)."""
    return 2.0 * math.pi * kz_length(params) / OSCILLATION_RATE


def fit_phase0(chi: Mapping[int, float], params: ChainParams) -> float:
    """Least-squares phase of the asymptotic form against chi(p) for p in [2 xi, 10 xi]."""
    xi = kz_length(params)
    points = sorted(p for p in chi if 2.0 * xi <= p <= 10.0 * xi)
    if len(points) < 2:
        raise ParameterError(f"Only {len(points)} correlation values fall inside [2 xi, 10 xi]")

    def residual(phi0: float) -> float:
        return sum((chi[p] - chi_asymptotic(p, params, phi0)) ** 2 for p in points)

    grid = np.linspace(-math.pi, math.pi, 73)
    best = grid[int(np.argmin([residual(x) for x in grid]))]
    step = grid[1] - grid[0]
    result = optimize.minimize_scalar(residual, bounds=(best - step, best + step), method="bounded")
    return float((result.x + math.pi) % (2.0 * math.pi) - math.pi)


def oscillation_period(chi: Mapping[int, float]) -> Optional[float]:
    """
    Period of (-1)^p chi(p) estimated from its zero crossings; None if fewer than two
    crossings are found.
    """
    ps = np.array(sorted(chi))
    if ps.size < 3:
        return None
    staggered = np.array([(-1) ** int(p) * chi[p] for p in ps])
    crossings = []
    for i in range(ps.size - 1):
        a, b = staggered[i], staggered[i + 1]
        if a == 0.0:
            crossings.append(float(ps[i]))
        elif a * b < 0:
            crossings.append(float(ps[i] + (ps[i + 1] - ps[i]) * a / (a - b)))
    if len(crossings) < 2:
        return None
    return 2.0 * float(np.mean(np.diff(crossings)))


def defect_expectation_numeric(finals: FinalState) -> float:
    """Sum over stored modes of 2 (1 - P_gs_k); each excited (k, -k) pair holds two quasiparticles."""
    finals.check_complete()
    return float(np.sum(2.0 * (1.0 - finals.p_gs)))


def defect_expectation_analytic(params: ChainParams) -> DefectEstimate:
    """
    Lowest-mode estimates of the number of defects, with x = 2 pi tau / tau0 and
    y = 2 J delta tau / g^2: the full form e^{-x-y} / (1 - e^{-x} + e^{-x-y}), the long-time form
    e^{-x-y} and the dissipative form e^{-y} / x. `value` is the long-time form for
    tau >= tau0 and the dissipative form otherwise.
    """
    if params.g == 0.0:
        raise ParameterError("Defect estimates need g > 0")
    x = lowest_mode_exponent(params)
    y = params.decay_exponent
    leak = math.exp(-x - y)
    full = leak / (-math.expm1(-x) + leak)
    long_time = leak
    dissipative = math.exp(-y) / x
    regime = "long_time" if params.tau >= params.tau0 else "dissipative"
    return DefectEstimate(
        value=long_time if regime == "long_time" else dissipative,
        regime=regime,
        full=full,
        long_time=long_time,
        dissipative=dissipative,
    )


def hermitian_density(params: ChainParams) -> float:
    """n0 = (1/2pi) sqrt(g / J tau)."""
    return math.sqrt(params.g / (params.J * params.tau)) / (2.0 * math.pi)


def density_lerch(params: ChainParams) -> float:
    """n0 e^{-y} Phi(1 - e^{-y}, 1/2, 1)."""
    n0 = hermitian_density(params)
    q = math.exp(-params.decay_exponent)
    if q == 1.0:
        return n0
    if q < 1e-12:
        # Phi(x, 1/2, 1) -> sqrt(pi / -ln x) as x -> 1
        return n0 * math.sqrt(math.pi * q)
    return n0 * q * lerch_phi(-math.expm1(-params.decay_exponent), 0.5, 1.0)


def density_quadrature(params: ChainParams, epsrel: float = 1e-11) -> float:
    """(1/pi) int_0^pi E q / (1 - E + E q) dphi with E = exp(-pi J tau phi^2 / g), q = e^{-y}."""
    rate = math.pi * params.J * params.tau / params.g
    q = math.exp(-params.decay_exponent)

    def integrand(phi: float) -> float:
        E = math.exp(-rate * phi * phi)
        return E * q / (1.0 - E * (1.0 - q))

    width = min(3.0 / math.sqrt(rate), math.pi / 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=0.0, epsrel=epsrel, limit=400, points=(width,))
        except integrate.IntegrationWarning as warning:
            raise QuadratureError(f"Defect-density quadrature did not converge: {warning}") from warning
    return value / math.pi


def defect_density(params: ChainParams, finals: Optional[FinalState] = None) -> DefectReport:
    """
    Defect density three ways: from chi(1) of a numeric final state (when given), by
    quadrature, and in closed form through the Lerch transcendent.
    """
    if params.g == 0.0:
        raise ParameterError("Defect densities need g > 0")
    density_chi = None
    n_bar = None
    if finals is not None:
        density_chi = (1.0 + pairing_G(0, finals).real) / 2.0
        n_bar = defect_expectation_numeric(finals)
    closed_form = density_lerch(params)
    return DefectReport(
        n_bar=n_bar,
        n_bar_analytic=defect_expectation_analytic(params).value,
        density=closed_form,
        density_chi=density_chi,
        density_quadrature=density_quadrature(params),
        density_lerch=closed_form,
        kz_length=kz_length(params),
        domain_size=domain_size(params),
        n0=hermitian_density(params),
        gaussian_regime=math.sqrt(2.0 * params.J * params.tau / params.g) >= GAUSSIAN_THRESHOLD,
    )
