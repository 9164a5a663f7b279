from abc import ABC, abstractmethod
from datetime import datetime, timezone
from typing import Optional

from pydantic import BaseModel, Field

RunCommand = str


class DomainEvent(BaseModel, ABC):
    """
    An abstract base class for domain events.
    Represents something significant that has happened during a run.
    """
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    @property
    @abstractmethod
    def name(self) -> str:
        """A unique, machine-readable name for the event."""
        pass


class ModesEvolved(DomainEvent):
    """A chunk of modes has been integrated (or evaluated in closed form)."""
    N: int
    first_index: int
    last_index: int
    delta: float
    tau: float
    engine: str = "ode"

    @property
    def name(self) -> str:
        return "modes.evolved"


class TauBracketed(DomainEvent):
    """Bisection of the annealing time for one system size has finished."""
    N: int
    target: float
    tau_star: float
    iterations: int

    @property
    def name(self) -> str:
        return "tau.bracketed"


class TargetUnreachable(DomainEvent):
    """The requested fidelity could not be reached for one system size."""
    N: int
    target: float
    best: Optional[float] = None

    @property
    def name(self) -> str:
        return "tau.unreachable"


class SizeFailed(DomainEvent):
    """A numerical failure stopped the annealing-time search for one system size."""
    N: int
    error_type: str
    message: str

    @property
    def name(self) -> str:
        return "tau.size_failed"


class CorrelationEvaluated(DomainEvent):
    """A correlation table for one dissipation rate has been computed."""
    delta: float
    max_p: int
    phase0: Optional[float] = None
    period: Optional[float] = None

    @property
    def name(self) -> str:
        return "correlation.evaluated"


class DeterminantRejected(DomainEvent):
    """A Toeplitz determinant had a non-negligible imaginary part."""
    delta: float
    p: int
    reason: str

    @property
    def name(self) -> str:
        return "correlation.determinant_rejected"


class DefectRowComputed(DomainEvent):
    """Defect statistics for one dissipation rate are ready."""
    delta: float
    density: float
    error: Optional[str] = None

    @property
    def name(self) -> str:
        return "defects.row_computed"


class RunCompleted(DomainEvent):
    command: RunCommand
    output_path: str
    duration_s: float

    @property
    def name(self) -> str:
        return "run.completed"


class RunFailed(DomainEvent):
    command: RunCommand
    error_type: str
    message: str

    @property
    def name(self) -> str:
        return "run.failed"
