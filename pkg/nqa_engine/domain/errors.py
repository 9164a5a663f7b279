from typing import Optional


class NQAError(Exception):
    """Base class for every error raised by the annealing engine."""


class ParameterError(NQAError, ValueError):
    """A physical or run parameter violates its documented range."""


class ConfigError(NQAError):
    """A run configuration file or override could not be parsed or validated."""


class IncompleteModeSetError(NQAError):
    """A system-level quantity was requested without every mode of the grid."""


class UnreachableTargetError(NQAError):
    """The requested ground-state fidelity cannot be reached in the searched range."""

    def __init__(self, message: str, target: float, best: Optional[float] = None):
        super().__init__(message)
        self.target = target
        self.best = best

    def __reduce__(self):
        return type(self), (self.args[0], self.target, self.best)


class NumericalError(NQAError):
    """Base class for failures of the numerical machinery."""


class IntegrationError(NumericalError):
    """The adaptive ODE integrator gave up (step-size underflow or tolerance failure)."""

    def __init__(self, message: str, t: float, k: float):
        super().__init__(f"{message} (t={t!r}, k={k!r})")
        self.message = message
        self.t = t
        self.k = k

    def __reduce__(self):
        # worker processes send errors back pickled
        return type(self), (self.message, self.t, self.k)


class DegenerateStateError(NumericalError):
    """Both amplitudes decayed below representable range; the mode has fully decayed."""


class BranchTrackingError(NumericalError):
    """The complex Bloch angle jumped by more than pi/2 between two tracking points."""


class ParameterRegionError(NumericalError):
    """Special-function arguments lie outside the validated region."""


class InternalConsistencyError(NumericalError):
    """Two evaluation regimes of a special function disagree on their overlap."""


class DeterminantValidityError(NumericalError):
    """The Toeplitz determinant has a non-negligible imaginary part."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""
