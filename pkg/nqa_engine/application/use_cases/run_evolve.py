import numpy as np

from nqa_engine.application.ports.event_bus import IEventBus
from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.domain.errors import ParameterError
from nqa_engine.domain.model import minimum_gap
from nqa_engine.domain.quench import default_sample_times, system_ground_probability, system_probability_series
from nqa_engine.domain.run_models import ConfigEvolve, ResultRecord, RunConfig

COLUMNS = ["s", "mode_index", "k", "P_gs_k", "P_gs_total"]


class RunEvolveHandler:
    """
    Handles the `evolve` command: integrates every mode over the whole schedule and
    reports P_gs_k(s) curves together with the system product.
    """

    def __init__(self, evolution_service: ModeEvolutionService, event_bus: IEventBus):
        self._service = evolution_service
        self._bus = event_bus

    async def execute(self, config: RunConfig) -> ResultRecord:
        section: ConfigEvolve = config.section
        params = config.params
        times = default_sample_times(params, config.sample_count)
        options = self._service.options_for(config.tolerances, section.initial_state)

        trajectories = await self._service.evolve_all(params, times, options)
        totals = system_probability_series(trajectories)

        reported = trajectories
        if section.report_modes is not None:
            wanted = set(section.report_modes)
            unknown = wanted - {traj.mode.index for traj in trajectories}
            if unknown:
                raise ParameterError(f"report_modes contains indices outside 1..{params.N // 2}: {sorted(unknown)}")
            reported = [traj for traj in trajectories if traj.mode.index in wanted]

        rows = []
        for i, t in enumerate(times):
            s = float(t / params.tau)
            for traj in reported:
                rows.append({
                    "s": s,
                    "mode_index": traj.mode.index,
                    "k": traj.mode.k,
                    "P_gs_k": float(traj.p_gs[i]),
                    "P_gs_total": float(totals[i]),
                })

        finals = np.array([traj.final_probability for traj in trajectories])
        norms = np.array([np.abs(traj.u) ** 2 + np.abs(traj.v) ** 2 for traj in trajectories])
        summary = {
            "P_gs_total": system_ground_probability(trajectories, params.tau),
            "min_mode_probability": float(finals.min()),
            "lowest_mode_probability": float(finals[0]),
            "final_norm_min": float(norms[:, -1].min()),
            "norm_max_deviation": float(np.max(np.abs(norms - 1.0))),
            "lowest_mode_gap": minimum_gap(trajectories[0].mode, params),
            "modes": len(trajectories),
        }
        return ResultRecord(
            config={**config.echo(), "integrator": options.model_dump()},
            summary=summary,
            columns=COLUMNS,
            rows=rows,
        )
