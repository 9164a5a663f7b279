from nqa_engine.application.ports.event_bus import IEventBus
from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.domain.errors import QuadratureError
from nqa_engine.domain.events import DefectRowComputed
from nqa_engine.domain.observables import (
    GAUSSIAN_THRESHOLD,
    defect_density,
    defect_expectation_analytic,
    density_lerch,
    domain_size,
    hermitian_density,
    kz_length,
)
from nqa_engine.domain.run_models import ConfigDefects, ResultRecord, RunConfig

COLUMNS = [
    "delta",
    "n_bar",
    "n_bar_analytic",
    "regime",
    "density_chi",
    "density_quadrature",
    "density_lerch",
    "n0",
    "ratio_to_n0",
    "error",
]


class RunDefectsHandler:
    """
    Handles the `defects` command: the defect density of the final state against the
    dissipation rate, numerically (optional) and in closed form.
    """

    def __init__(self, evolution_service: ModeEvolutionService, event_bus: IEventBus):
        self._service = evolution_service
        self._bus = event_bus

    async def execute(self, config: RunConfig) -> ResultRecord:
        section: ConfigDefects = config.section
        params = config.params
        options = self._service.options_for(config.tolerances)

        rows = []
        for delta in section.deltas:
            delta_params = params.with_delta(delta)
            finals = await self._service.final_state(delta_params, options) if section.numeric else None
            try:
                report = defect_density(delta_params, finals)
            except QuadratureError as error:
                # the closed form survives a failed quadrature
                estimate = defect_expectation_analytic(delta_params)
                closed_form = density_lerch(delta_params)
                row = {
                    "delta": delta,
                    "n_bar": None,
                    "n_bar_analytic": estimate.value,
                    "regime": estimate.regime,
                    "density_chi": None,
                    "density_quadrature": None,
                    "density_lerch": closed_form,
                    "n0": hermitian_density(delta_params),
                    "ratio_to_n0": closed_form / hermitian_density(delta_params),
                    "error": str(error),
                }
            else:
                row = {
                    "delta": delta,
                    "n_bar": report.n_bar,
                    "n_bar_analytic": report.n_bar_analytic,
                    "regime": defect_expectation_analytic(delta_params).regime,
                    "density_chi": report.density_chi,
                    "density_quadrature": report.density_quadrature,
                    "density_lerch": report.density_lerch,
                    "n0": report.n0,
                    "ratio_to_n0": report.density / report.n0,
                    "error": None,
                }
            rows.append(row)
            await self._bus.publish(
                DefectRowComputed(delta=delta, density=row["density_lerch"], error=row["error"])
            )

        summary = {
            "N": params.N,
            "tau": params.tau,
            "tau0": params.tau0,
            "kz_length": kz_length(params),
            "domain_size": domain_size(params),
            "gaussian_regime": (2.0 * params.J * params.tau / params.g) ** 0.5 >= GAUSSIAN_THRESHOLD,
            "rows_with_errors": sum(1 for row in rows if row["error"]),
        }
        return ResultRecord(
            config={**config.echo(), "integrator": options.model_dump()},
            summary=summary,
            columns=COLUMNS,
            rows=rows,
        )
