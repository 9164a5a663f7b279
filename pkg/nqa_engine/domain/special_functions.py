"""
Complex parabolic-cylinder functions D_nu(z) and the Lerch transcendent.

D_nu(z) is evaluated from the Kummer-function representation for small |z| and from the
large-|z| expansion (with the secondary exponential beyond the Stokes lines arg z = +-pi/2)
for large |z|. The Kummer series suffers cancellation of order exp(|z|^2/2), so its terms are
accumulated in mpmath at a working precision sized to that loss.
"""
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from mpmath.libmp import NoConvergence
from scipy import special

from nqa_engine.domain.errors import (
    InternalConsistencyError,
    ParameterError,
    ParameterRegionError,
)

Z_SWITCH = 8.0
OVERLAP_BAND = (6.0, 10.0)
MAX_ORDER = 1.0e3
MAX_ARGUMENT = 1.0e3
# Largest |z| at which the Kummer series is an acceptable fallback.
SERIES_LIMIT = 60.0

ASYMPTOTIC_TOLERANCE = 1.0e-10
OVERLAP_TOLERANCE = 1.0e-6

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class _Expansion:
    value: complex
    error: float


def _check_region(nu: complex, z: complex) -> None:
    if abs(nu) > MAX_ORDER or abs(z) > MAX_ARGUMENT:
        raise ParameterRegionError(
            f"D_nu(z) requested outside the validated region: |nu|={abs(nu):.4g}, |z|={abs(z):.4g}"
        )


def _kummer_terms(a, b, x, eps):
    """Sums 1F1(a; b; x) in the current mpmath context."""
    total = mpmath.mpc(1)
    term = mpmath.mpc(1)
    peak = mpmath.mpf(1)
    n = 0
    while True:
        term *= (a + n) / (b + n) * x / (n + 1)
        total += term
        n += 1
        magnitude = abs(term)
        peak = max(peak, magnitude)
        if n > abs(x) and magnitude < eps * abs(total) and magnitude < eps * peak:
            return total
        if n > 100000:
            raise ParameterRegionError(f"Kummer series did not converge for a={a}, x={x}")


def pcfd_series(nu: complex, z: complex) -> complex:
    """
    D_nu(z) = 2^{nu/2} e^{-z^2/4} [ sqrt(pi)/Gamma((1-nu)/2) M(-nu/2, 1/2, z^2/2)
                                   - sqrt(2 pi) z / Gamma(-nu/2) M((1-nu)/2, 3/2, z^2/2) ].
    """
    x_abs = abs(z) ** 2 / 2.0
    lost_digits = (x_abs + (abs(nu) / 2.0 + 1.0) * math.log(x_abs + 2.0)) / math.log(10.0)
    with mpmath.workdps(int(25 + lost_digits)):
        nu_mp = mpmath.mpc(nu.real, nu.imag)
        z_mp = mpmath.mpc(z.real, z.imag)
        x = z_mp * z_mp / 2
        eps = mpmath.mpf(10) ** (-22)
        even = _kummer_terms(-nu_mp / 2, mpmath.mpf(0.5), x, eps)
        odd = _kummer_terms((1 - nu_mp) / 2, mpmath.mpf(1.5), x, eps)
        value = mpmath.power(2, nu_mp / 2) * mpmath.exp(-z_mp * z_mp / 4) * (
            mpmath.sqrt(mpmath.pi) * mpmath.rgamma((1 - nu_mp) / 2) * even
            - mpmath.sqrt(2 * mpmath.pi) * z_mp * mpmath.rgamma(-nu_mp / 2) * odd
        )
        return complex(value)


def _asymptotic_sum(z2: complex, step) -> tuple[complex, float]:
    """
    Sums 1 + t_1 + t_2 + ... with t_{n+1} = t_n * step(n) / z2 until the terms stop
    decreasing; returns the partial sum and the magnitude of the last term kept.
    """
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    last = 1.0
    for n in range(0, 400):
        nxt = term * step(n) / z2
        size = abs(nxt)
        if size >= last:
            break
        total += nxt
        term = nxt
        last = size
        if size < 1.0e-17 * abs(total):
            break
    return total, last


def pcfd_asymptotic(nu: complex, z: complex) -> _Expansion:
    """Large-|z| expansion of D_nu(z); `error` is a relative truncation estimate."""
    z2 = z * z
    log_z = np.log(z)
    arg = np.angle(z)

    primary_series, primary_err = _asymptotic_sum(
        z2, lambda n: -(nu - 2 * n) * (nu - 2 * n - 1) / (2.0 * (n + 1))
    )
    log_primary = nu * log_z - z2 / 4.0
    value = np.exp(log_primary) * primary_series
    error = primary_err * abs(np.exp(log_primary))

    if abs(arg) > math.pi / 2:
        rotation = 1j * math.pi * nu if arg > 0 else -1j * math.pi * nu
        secondary_series, secondary_err = _asymptotic_sum(
            z2, lambda n: (nu + 2 * n + 1) * (nu + 2 * n + 2) / (2.0 * (n + 1))
        )
        rg = special.rgamma(-nu)
        if rg != 0:
            log_secondary = (
                _LOG_SQRT_2PI - special.loggamma(-nu) + rotation + z2 / 4.0 - (nu + 1.0) * log_z
            )
            magnitude = np.exp(log_secondary)
            value -= magnitude * secondary_series
            error += secondary_err * abs(magnitude)

    scale = abs(value)
    return _Expansion(value=complex(value), error=float(error / scale) if scale > 0 else math.inf)


def parabolic_cylinder_D(nu: complex, z: complex) -> complex:
    """
    Parabolic-cylinder (Weber) function D_nu(z) for complex order and argument.

    Uses the Kummer series for |z| <= Z_SWITCH and the large-|z| expansion beyond, falling back
    to the series when the expansion cannot reach ASYMPTOTIC_TOLERANCE. On the overlap band both
    regimes are compared.
    """
    nu, z = complex(nu), complex(z)
    _check_region(nu, z)
    radius = abs(z)

    if radius <= Z_SWITCH:
        series = pcfd_series(nu, z)
        if radius >= OVERLAP_BAND[0]:
            _cross_check(nu, z, series, pcfd_asymptotic(nu, z))
        return series

    expansion = pcfd_asymptotic(nu, z)
    if expansion.error > ASYMPTOTIC_TOLERANCE or not np.isfinite(expansion.value):
        if radius > SERIES_LIMIT:
            raise ParameterRegionError(
                f"No accurate regime for D_nu(z) at nu={nu}, z={z} (asymptotic error {expansion.error:.2e})"
            )
        return pcfd_series(nu, z)
    if radius <= OVERLAP_BAND[1]:
        _cross_check(nu, z, pcfd_series(nu, z), expansion)
    return expansion.value


def parabolic_cylinder_D_or_reference(nu: complex, z: complex) -> complex:
    """
    `parabolic_cylinder_D`, taken from mpmath where the in-house regimes decline the arguments.
    Raises ParameterRegionError when neither gives a finite value.
    """
    try:
        value = parabolic_cylinder_D(nu, z)
    except (ParameterRegionError, InternalConsistencyError, OverflowError):
        value = complex(math.nan, math.nan)
    if np.isfinite(value):
        return value
    nu, z = complex(nu), complex(z)
    try:
        with mpmath.workdps(30):
            value = complex(mpmath.pcfd(mpmath.mpc(nu.real, nu.imag), mpmath.mpc(z.real, z.imag)))
    except (NoConvergence, OverflowError) as error:
        raise ParameterRegionError(f"No value for D_nu(z) at nu={nu}, z={z}: {error}") from error
    if not np.isfinite(value):
        raise ParameterRegionError(f"D_nu(z) is out of floating-point range at nu={nu}, z={z}")
    return value


def _cross_check(nu: complex, z: complex, series: complex, expansion: _Expansion) -> None:
    if expansion.error > ASYMPTOTIC_TOLERANCE:
        return
    mismatch = abs(series - expansion.value) / max(abs(series), 1e-300)
    if mismatch > OVERLAP_TOLERANCE:
        raise InternalConsistencyError(
            f"Series and asymptotic D_nu(z) disagree by {mismatch:.2e} at nu={nu}, z={z}"
        )


def lerch_phi(x: float, s: float, a: float, terms: int = 50) -> float:
    """
    Lerch transcendent sum_{n>=0} x^n / (n + a)^s for 0 <= x < 1, s > 0, a > 0.

    The first `terms` summands are added directly; the tail is the Euler-Maclaurin
    integral (an upper incomplete gamma function) with four derivative corrections.
    """
    if not 0.0 <= x < 1.0:
        raise ParameterError(f"lerch_phi requires 0 <= x < 1, got x={x}")
    if s <= 0 or a <= 0:
        raise ParameterError(f"lerch_phi requires s > 0 and a > 0, got s={s}, a={a}")
    if x == 0.0:
        return a ** (-s)
    if 1.0 - x < 1.0e-12:
        raise ParameterError(f"x={x} is closer to 1 than 1e-12")

    n = np.arange(terms, dtype=float)
    head = float(np.sum(np.exp(n * math.log(x)) * (n + a) ** (-s)))

    lam = -math.log(x)
    start = terms + a
    tail_integral = float(
        mpmath.exp(lam * a) * mpmath.power(lam, s - 1) * mpmath.gammainc(1 - s, lam * start)
    )

    def derivative(order: int) -> float:
        # d^order/dn^order of exp(-lam n) (n + a)^(-s) at n = terms
        total = 0.0
        for i in range(order + 1):
            power_part = (-1) ** i * special.poch(s, i) * start ** (-s - i)
            total += special.comb(order, i) * (-lam) ** (order - i) * power_part
        return math.exp(-lam * terms) * total

    correction = 0.5 * math.exp(-lam * terms) * start ** (-s)
    for j, bernoulli in ((1, 1.0 / 6.0), (2, -1.0 / 30.0), (3, 1.0 / 42.0), (4, -1.0 / 30.0)):
        correction -= bernoulli / math.factorial(2 * j) * derivative(2 * j - 1)
    return head + tail_integral + correction
