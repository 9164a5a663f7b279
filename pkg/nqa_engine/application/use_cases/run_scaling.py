from nqa_engine.application.ports.event_bus import IEventBus
from nqa_engine.application.use_cases.run_sweep_tau import fit_scaling
from nqa_engine.domain.analytic import annealing_time_estimate, system_probability_estimate
from nqa_engine.domain.errors import UnreachableTargetError
from nqa_engine.domain.events import TargetUnreachable
from nqa_engine.domain.run_models import ConfigScaling, ResultRecord, RunConfig

COLUMNS = ["delta", "N", "tau0", "tau_star", "tau_nqa", "tau_star_over_tau0", "condition", "error"]


class RunScalingHandler:
    """Handles the `scaling` command: closed-form annealing times over sizes and dissipation rates."""

    def __init__(self, event_bus: IEventBus):
        self._bus = event_bus

    async def execute(self, config: RunConfig) -> ResultRecord:
        section: ConfigScaling = config.section
        rows = []
        fits = {}
        for delta in section.deltas:
            reached = []
            for N in section.sizes:
                params = config.params.with_delta(delta).with_size(N)
                row = {
                    "delta": delta,
                    "N": N,
                    "tau0": params.tau0,
                    "tau_star": None,
                    "tau_nqa": None,
                    "tau_star_over_tau0": None,
                    "condition": None,
                    "error": None,
                }
                try:
                    estimate = annealing_time_estimate(N, params, section.target)
                except UnreachableTargetError as error:
                    row["error"] = str(error)
                    await self._bus.publish(TargetUnreachable(N=N, target=section.target, best=error.best))
                else:
                    row["tau_star"] = estimate.tau_star
                    row["tau_nqa"] = estimate.tau_nqa
                    row["tau_star_over_tau0"] = estimate.tau_star / estimate.tau0
                    row["condition"] = system_probability_estimate(params.with_tau(estimate.tau_star)).condition
                    reached.append((N, estimate.tau_star))
                rows.append(row)
            fits[repr(delta)] = fit_scaling(reached)

        return ResultRecord(
            config=config.echo(),
            summary={
                "target": section.target,
                "unreachable": sum(1 for row in rows if row["tau_star"] is None),
                "deltas": fits,
            },
            columns=COLUMNS,
            rows=rows,
        )
