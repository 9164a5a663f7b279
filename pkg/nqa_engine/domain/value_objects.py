import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ImmutableValueObject(BaseModel):
    """
    A base class for value objects to ensure they are immutable.
    Value objects are compared by their values, not their identity.
    """
    model_config = ConfigDict(frozen=True)


class ChainParams(ImmutableValueObject):
    """
    Physical and run parameters of one annealing experiment.
    J sets the unit of energy; tau is measured in units of 1/J.
    """
    N: int = Field(description="Number of spins, even and at least 4")
    J: float = Field(gt=0.0, description="Coupling energy")
    g: float = Field(ge=0.0, description="Initial transverse-field amplitude")
    delta: float = Field(default=0.0, ge=0.0, description="Decay rate parameter")
    tau: float = Field(gt=0.0, description="Annealing duration")

    @field_validator("N")
    @classmethod
    def _check_even(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError(f"N must be an even integer >= 4, got {value}")
        return value

    @property
    def is_hermitian(self) -> bool:
        return self.delta == 0.0

    @property
    def gamma(self) -> complex:
        """Complex slope of the linear schedule, (g + i delta) / tau."""
        return complex(self.g, self.delta) / self.tau

    @property
    def tau0(self) -> float:
        """Characteristic Hermitian annealing time 2 g N^2 / (pi^2 J)."""
        return 2.0 * self.g * self.N**2 / (math.pi**2 * self.J)

    @property
    def decay_exponent(self) -> float:
        """Re z^2(tau) in the small-delta convention, 2 J delta tau / g^2."""
        if self.g == 0.0:
            return math.inf if self.delta > 0 else 0.0
        return 2.0 * self.J * self.delta * self.tau / self.g**2

    def with_tau(self, tau: float) -> "ChainParams":
        return self.model_copy(update={"tau": tau})

    def with_delta(self, delta: float) -> "ChainParams":
        return self.model_copy(update={"delta": delta})

    def with_size(self, N: int) -> "ChainParams":
        return ChainParams(N=N, J=self.J, g=self.g, delta=self.delta, tau=self.tau)


class Mode(ImmutableValueObject):
    """
    One stored momentum mode. It stands for the two-dimensional (k, -k) subspace.
    index is the 1-based mode label m, with k = m - 1/2.
    """
    index: int = Field(ge=1)
    k: float
    phi: float

    @property
    def sin_phi(self) -> float:
        return math.sin(self.phi)

    @property
    def cos_phi(self) -> float:
        return math.cos(self.phi)


class ModeGrid(ImmutableValueObject):
    """The N/2 positive half-integer momenta of the antiperiodic sector."""
    N: int
    modes: tuple[Mode, ...]

    @property
    def ks(self) -> list[float]:
        return [mode.k for mode in self.modes]

    @property
    def phis(self) -> list[float]:
        return [mode.phi for mode in self.modes]

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def by_index(self, index: int) -> Mode:
        if not 1 <= index <= len(self.modes):
            raise KeyError(f"Mode index {index} is outside 1..{len(self.modes)}")
        return self.modes[index - 1]

    def by_k(self, k: float) -> Mode:
        return self.by_index(int(round(k + 0.5)))


class ComplexCoupling(ImmutableValueObject):
    """Value of g~(t) = g(t) + i delta(t) together with the slope gamma."""
    t: float
    g_tilde: complex
    gamma: complex


class ModeAmplitudes(ImmutableValueObject):
    """Amplitudes (u_k, v_k) at time t; the global phase exp(i int eps0 dt) is dropped."""
    u: complex
    v: complex
    t: float = 0.0

    @property
    def norm(self) -> float:
        return abs(self.u) ** 2 + abs(self.v) ** 2


class AdiabaticProjection(ImmutableValueObject):
    """Amplitudes in the instantaneous eigenbasis and the Bloch angle they were taken at."""
    alpha: complex
    beta: complex
    theta: complex


class WeberParams(ImmutableValueObject):
    """Parameters of the parabolic-cylinder solution for one mode."""
    nu: complex
    z0: complex
    z_tau: complex
    A: complex
    B: complex = 0j


class ScalingEstimate(ImmutableValueObject):
    """Annealing-time estimates for one system size and target fidelity."""
    N: int
    tau0: float
    tau_star: float
    tau_nqa: Optional[float] = None
    target: float


class ModeProbabilityEstimate(ImmutableValueObject):
    """Closed-form final ground-state probability of one mode with its regime flag."""
    value: float
    long_wavelength: bool


class SystemProbabilityEstimate(ImmutableValueObject):
    """Single-mode estimates of the whole-system ground-state probability."""
    full: float
    small_tau: float
    near_unity: float
    condition: float = Field(description="2 J delta tau / g^2 - ln(tau0 / 2 pi tau)")


class DefectEstimate(ImmutableValueObject):
    """Single-mode estimates of the number of defects."""
    value: float
    regime: Literal["long_time", "dissipative"]
    full: float
    long_time: float
    dissipative: float
