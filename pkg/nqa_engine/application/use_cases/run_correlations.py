from typing import Dict, List, Optional

from nqa_engine.application.ports.event_bus import IEventBus
from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.domain.entities import CorrelationTable
from nqa_engine.domain.errors import DeterminantValidityError, ParameterError
from nqa_engine.domain.events import CorrelationEvaluated, DeterminantRejected
from nqa_engine.domain.observables import (
    DETERMINANT_BUDGET,
    chi_asymptotic,
    correlation_chi,
    domain_size,
    fit_phase0,
    ground_state_table,
    kz_length,
    oscillation_period,
    pairing_table,
    predicted_period,
)
from nqa_engine.domain.run_models import ConfigCorrelations, ResultRecord, RunConfig
from nqa_engine.domain.value_objects import ChainParams

COLUMNS = ["delta", "p", "G_re", "G_im", "im_beta", "chi", "chi_asymptotic", "error"]


class RunCorrelationsHandler:
    """
    Handles the `correlations` command: the final-state spin correlator chi(p) for each
    dissipation rate, next to its asymptotic Kibble-Zurek form.
    """

    def __init__(
        self,
        evolution_service: ModeEvolutionService,
        event_bus: IEventBus,
        determinant_budget: int = DETERMINANT_BUDGET,
    ):
        self._service = evolution_service
        self._bus = event_bus
        self._budget = determinant_budget

    async def execute(self, config: RunConfig) -> ResultRecord:
        section: ConfigCorrelations = config.section
        params = config.params
        budget = config.tolerances.determinant_budget or self._budget
        if section.max_p > params.N // 2:
            raise ParameterError(f"max_p={section.max_p} exceeds N/2={params.N // 2}")
        if section.max_p > budget:
            raise ParameterError(f"max_p={section.max_p} exceeds the determinant budget {budget}")
        options = self._service.options_for(config.tolerances)

        rows: List[dict] = []
        per_delta: Dict[str, dict] = {}
        for delta in section.deltas:
            delta_params = params.with_delta(delta)
            if section.ground_state:
                table = ground_state_table(section.max_p)
            else:
                finals = await self._service.final_state(delta_params, options)
                table = pairing_table(finals, section.max_p)
            delta_rows, delta_summary = await self._evaluate(delta_params, table, section.max_p, budget)
            rows.extend(delta_rows)
            per_delta[repr(delta)] = delta_summary

        params_summary = {
            "kz_length": kz_length(params) if params.g > 0 else None,
            "domain_size": domain_size(params) if params.g > 0 else None,
            "predicted_period": predicted_period(params) if params.g > 0 else None,
        }
        return ResultRecord(
            config={**config.echo(), "integrator": options.model_dump(), "determinant_budget": budget},
            summary={"max_p": section.max_p, **params_summary, "deltas": per_delta},
            columns=COLUMNS,
            rows=rows,
        )

    async def _evaluate(self, params: ChainParams, table: CorrelationTable, max_p: int, budget: int):
        errors: Dict[int, str] = {}
        for p in range(1, max_p + 1):
            try:
                table.chi[p] = correlation_chi(p, table, budget)
            except DeterminantValidityError as error:
                errors[p] = str(error)
                await self._bus.publish(DeterminantRejected(delta=params.delta, p=p, reason=str(error)))

        phase0: Optional[float] = None
        if params.g > 0:
            try:
                phase0 = fit_phase0(table.chi, params)
            except ParameterError:
                phase0 = None
        period = oscillation_period(table.chi)
        await self._bus.publish(
            CorrelationEvaluated(delta=params.delta, max_p=max_p, phase0=phase0, period=period)
        )

        rows = []
        for p in range(1, max_p + 1):
            G = table.G.get(p)
            rows.append({
                "delta": params.delta,
                "p": p,
                "G_re": None if G is None else G.real,
                "G_im": None if G is None else G.imag,
                "im_beta": table.im_beta.get(p),
                "chi": table.chi.get(p),
                "chi_asymptotic": chi_asymptotic(p, params, phase0 or 0.0) if params.g > 0 else None,
                "error": errors.get(p),
            })
        summary = {
            "phase0": phase0,
            "period": period,
            "rejected": len(errors),
            "chi_1": table.chi.get(1),
        }
        return rows, summary
