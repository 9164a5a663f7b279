from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from nqa_engine.domain.errors import IncompleteModeSetError
from nqa_engine.domain.value_objects import Mode, ModeAmplitudes


class ModeTrajectory(BaseModel):
    """
    Sampled evolution of one mode. Arrays share the time axis `t`, which is strictly increasing.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mode: Mode
    N: int
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    theta: np.ndarray
    p_gs: np.ndarray

    def index_of(self, t: float) -> int:
        tolerance = 1e-12 * max(1.0, float(self.t[-1]))
        i = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[i] - t) > tolerance:
            raise KeyError(f"Time {t} was not sampled for mode k={self.mode.k}")
        return i

    @property
    def final(self) -> ModeAmplitudes:
        return ModeAmplitudes(u=complex(self.u[-1]), v=complex(self.v[-1]), t=float(self.t[-1]))

    @property
    def final_probability(self) -> float:
        return float(self.p_gs[-1])


class FinalState(BaseModel):
    """
    Amplitudes of every stored mode at the end of the anneal (g~ = 0), in mode order.
    This is the snapshot every final-state observable is computed from.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    N: int
    phis: np.ndarray
    u: np.ndarray
    v: np.ndarray
    p_gs: np.ndarray

    @classmethod
    def from_trajectories(cls, trajectories: List[ModeTrajectory]) -> "FinalState":
        if not trajectories:
            raise IncompleteModeSetError("No mode trajectories were supplied")
        N = trajectories[0].N
        ordered = sorted(trajectories, key=lambda traj: traj.mode.index)
        indices = [traj.mode.index for traj in ordered]
        if indices != list(range(1, N // 2 + 1)):
            raise IncompleteModeSetError(
                f"Final state needs modes 1..{N // 2}, got {len(set(indices))} distinct modes"
            )
        return cls(
            N=N,
            phis=np.array([traj.mode.phi for traj in ordered]),
            u=np.array([traj.u[-1] for traj in ordered], dtype=complex),
            v=np.array([traj.v[-1] for traj in ordered], dtype=complex),
            p_gs=np.array([traj.p_gs[-1] for traj in ordered]),
        )

    def check_complete(self) -> None:
        expected = self.N // 2
        for name in ("phis", "u", "v", "p_gs"):
            if len(getattr(self, name)) != expected:
                raise IncompleteModeSetError(
                    f"Final state holds {len(getattr(self, name))} entries in '{name}', expected {expected}"
                )


class CorrelationTable(BaseModel):
    """Wick pairings G_p, the diagnostic Im beta_p and Toeplitz determinants chi(p)."""
    G: Dict[int, complex] = Field(default_factory=dict)
    im_beta: Dict[int, float] = Field(default_factory=dict)
    chi: Dict[int, float] = Field(default_factory=dict)


class DefectReport(BaseModel):
    """Defect statistics of one run."""
    n_bar: Optional[float] = Field(default=None, ge=0.0, description="Numeric defect expectation")
    n_bar_analytic: float
    density: float = Field(description="Defect density from the closed form")
    density_chi: Optional[float] = None
    density_quadrature: float
    density_lerch: float
    kz_length: float = Field(gt=0.0)
    domain_size: float = Field(gt=0.0)
    n0: float
    gaussian_regime: bool
