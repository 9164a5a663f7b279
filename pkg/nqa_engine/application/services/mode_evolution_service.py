from typing import List, Literal, Optional, Sequence

import numpy as np

from nqa_engine.application.ports.event_bus import IEventBus
from nqa_engine.application.ports.mode_executor import IModeExecutor
from nqa_engine.domain.entities import FinalState, ModeTrajectory
from nqa_engine.domain.events import ModesEvolved
from nqa_engine.domain.model import mode_grid
from nqa_engine.domain.quench import IntegratorOptions, evolve_modes
from nqa_engine.domain.run_models import ConfigTolerances
from nqa_engine.domain.value_objects import ChainParams, Mode


def evolve_chunk(
    modes: List[Mode], params: ChainParams, sample_times: np.ndarray, options: IntegratorOptions
) -> List[ModeTrajectory]:
    """Worker entry point; module level so that process pools can pickle it."""
    return evolve_modes(modes, params, sample_times, options)


def chunked(modes: Sequence[Mode], size: int) -> List[List[Mode]]:
    return [list(modes[i:i + size]) for i in range(0, len(modes), size)]


class ModeEvolutionService:
    """
    Integrates every mode of a chain through the mode executor.

    Modes are cut into chunks of a fixed size, independent of the number of workers, so
    a run produces the same floating-point results whatever the pool size.
    """

    def __init__(
        self,
        executor: IModeExecutor,
        event_bus: IEventBus,
        method: Literal["RK45", "DOP853"] = "RK45",
        rtol: float = 1e-10,
        atol: float = 1e-12,
        tracking_points: int = 4096,
        chunk_size: int = 64,
    ):
        self._executor = executor
        self._bus = event_bus
        self._defaults = IntegratorOptions(method=method, rtol=rtol, atol=atol, tracking_points=tracking_points)
        self.chunk_size = chunk_size

    def options_for(
        self, tolerances: Optional[ConfigTolerances] = None, initial_state: str = "ground_branch"
    ) -> IntegratorOptions:
        """Engine defaults overlaid with the per-run overrides."""
        overrides = {}
        if tolerances is not None:
            overrides = {
                key: value
                for key, value in tolerances.model_dump(include={"method", "rtol", "atol", "tracking_points"}).items()
                if value is not None
            }
        return self._defaults.model_copy(update={**overrides, "initial_state": initial_state})

    async def evolve_all(
        self,
        params: ChainParams,
        sample_times: Sequence[float],
        options: Optional[IntegratorOptions] = None,
    ) -> List[ModeTrajectory]:
        """Trajectories of all N/2 modes, in mode order."""
        options = options or self._defaults
        times = np.asarray(sample_times, dtype=float)
        chunks = chunked(mode_grid(params.N).modes, self.chunk_size)
        results = await self._executor.map(evolve_chunk, [(chunk, params, times, options) for chunk in chunks])

        trajectories: List[ModeTrajectory] = []
        for chunk, chunk_result in zip(chunks, results):
            trajectories.extend(chunk_result)
            await self._bus.publish(
                ModesEvolved(
                    N=params.N,
                    first_index=chunk[0].index,
                    last_index=chunk[-1].index,
                    delta=params.delta,
                    tau=params.tau,
                )
            )
        return trajectories

    async def final_state(self, params: ChainParams, options: Optional[IntegratorOptions] = None) -> FinalState:
        """Amplitudes of every mode at t = tau."""
        trajectories = await self.evolve_all(params, [0.0, params.tau], options)
        return FinalState.from_trajectories(trajectories)
