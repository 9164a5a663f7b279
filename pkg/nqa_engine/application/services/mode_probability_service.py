import math
from typing import List, Literal, Tuple

from nqa_engine.application.ports.event_bus import IEventBus
from nqa_engine.application.ports.mode_executor import IModeExecutor
from nqa_engine.application.services.mode_evolution_service import chunked
from nqa_engine.domain.analytic import nqa_mode_probability, weber_final_probability
from nqa_engine.domain.errors import NumericalError
from nqa_engine.domain.events import ModesEvolved
from nqa_engine.domain.model import mode_grid
from nqa_engine.domain.quench import IntegratorOptions, evolve_modes, log_system_probability
from nqa_engine.domain.value_objects import ChainParams, Mode

Engine = Literal["weber", "ode"]


def final_probability_chunk(
    modes: List[Mode], params: ChainParams, engine: Engine, options: IntegratorOptions
) -> List[Tuple[float, bool]]:
    """
    Final intrinsic ground-state probability of each mode, paired with a flag telling whether
    the closed-form asymptotic value had to stand in for the parabolic-cylinder evaluation.
    Failures of the ODE engine are left to the caller.
    """
    if engine == "ode":
        trajectories = evolve_modes(modes, params, [0.0, params.tau], options)
        return [(traj.final_probability, False) for traj in trajectories]

    values = []
    for mode in modes:
        try:
            values.append((weber_final_probability(mode, params, options.initial_state), False))
        except NumericalError:
            values.append((nqa_mode_probability(mode, params).value, True))
    return values


class ModeProbabilityService:
    """Whole-system final ground-state probability, for annealing-time searches."""

    def __init__(self, executor: IModeExecutor, event_bus: IEventBus, chunk_size: int = 64):
        self._executor = executor
        self._bus = event_bus
        self.chunk_size = chunk_size

    async def mode_probabilities(
        self, params: ChainParams, engine: Engine, options: IntegratorOptions
    ) -> List[Tuple[float, bool]]:
        modes = mode_grid(params.N).modes
        chunks = chunked(modes, self.chunk_size)
        results = await self._executor.map(
            final_probability_chunk, [(chunk, params, engine, options) for chunk in chunks]
        )
        await self._bus.publish(
            ModesEvolved(
                N=params.N, first_index=modes[0].index, last_index=modes[-1].index,
                delta=params.delta, tau=params.tau, engine=engine,
            )
        )
        return [value for chunk_result in results for value in chunk_result]

    async def system_probability(
        self, params: ChainParams, engine: Engine, options: IntegratorOptions
    ) -> Tuple[float, int]:
        """Product over all modes, and how many modes fell back to the closed form."""
        values = await self.mode_probabilities(params, engine, options)
        fallbacks = sum(1 for _, fell_back in values if fell_back)
        return math.exp(log_system_probability(value for value, _ in values)), fallbacks
