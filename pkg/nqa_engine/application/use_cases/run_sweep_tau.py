import math
from typing import List, Tuple

import numpy as np

from nqa_engine.application.ports.event_bus import IEventBus
from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.application.services.mode_probability_service import Engine, ModeProbabilityService
from nqa_engine.domain.analytic import annealing_time_estimate, logarithmic_time_estimate
from nqa_engine.domain.errors import NumericalError, UnreachableTargetError
from nqa_engine.domain.events import SizeFailed, TargetUnreachable, TauBracketed
from nqa_engine.domain.quench import IntegratorOptions
from nqa_engine.domain.run_models import ConfigSweepTau, ResultRecord, RunConfig
from nqa_engine.domain.value_objects import ChainParams

COLUMNS = ["N", "tau_star_numeric", "tau_star_analytic", "tau0", "tau_nqa", "fallback_modes", "error"]

# Bracket expansion stops after this many doublings / halvings.
MAX_EXPANSIONS = 40
MIN_TAU = 1e-6


class RunSweepTauHandler:
    """
    Handles the `sweep-tau` command: for each system size, bisects the annealing time at
    which the whole-system ground-state probability reaches the target.
    """

    def __init__(
        self,
        probability_service: ModeProbabilityService,
        evolution_service: ModeEvolutionService,
        event_bus: IEventBus,
    ):
        self._probabilities = probability_service
        self._evolution = evolution_service
        self._bus = event_bus

    async def execute(self, config: RunConfig) -> ResultRecord:
        section: ConfigSweepTau = config.section
        options = self._evolution.options_for(config.tolerances)
        rows = []
        for N in section.sizes:
            rows.append(await self._sweep_size(config.params.with_size(N), section, options))

        reached = [(row["N"], row["tau_star_numeric"]) for row in rows if row["tau_star_numeric"] is not None]
        summary = {
            "target": section.target,
            "engine": section.engine,
            "sizes": len(rows),
            "unreachable": len(rows) - len(reached),
            **fit_scaling(reached),
        }
        return ResultRecord(
            config={**config.echo(), "integrator": options.model_dump()},
            summary=summary,
            columns=COLUMNS,
            rows=rows,
        )

    async def _sweep_size(self, params: ChainParams, section: ConfigSweepTau, options: IntegratorOptions) -> dict:
        row = {
            "N": params.N,
            "tau_star_numeric": None,
            "tau_star_analytic": None,
            "tau0": params.tau0,
            "tau_nqa": logarithmic_time_estimate(params.N, params),
            "fallback_modes": 0,
            "error": None,
        }
        try:
            row["tau_star_analytic"] = annealing_time_estimate(params.N, params, section.target).tau_star
        except UnreachableTargetError as error:
            row["error"] = f"analytic: {error}"

        try:
            tau_star, iterations, fallbacks = await self._bisect(
                params, section.engine, options, section.target, section.tau_rtol,
                start=row["tau_star_analytic"] or params.tau0,
            )
        except UnreachableTargetError as error:
            row["error"] = str(error)
            await self._bus.publish(TargetUnreachable(N=params.N, target=section.target, best=error.best))
            return row
        except NumericalError as error:
            # the size is flagged and the sweep moves on
            row["error"] = f"{type(error).__name__}: {error}"
            await self._bus.publish(SizeFailed(N=params.N, error_type=type(error).__name__, message=str(error)))
            return row

        row["tau_star_numeric"] = tau_star
        row["fallback_modes"] = fallbacks
        await self._bus.publish(
            TauBracketed(N=params.N, target=section.target, tau_star=tau_star, iterations=iterations)
        )
        return row

    async def _bisect(
        self,
        params: ChainParams,
        engine: Engine,
        options: IntegratorOptions,
        target: float,
        rtol: float,
        start: float,
    ) -> Tuple[float, int, int]:
        """Log-scale bisection of tau; returns (tau_star, iterations, fallback modes at tau_star)."""
        async def probability(tau: float) -> Tuple[float, int]:
            return await self._probabilities.system_probability(params.with_tau(tau), engine, options)

        iterations = 0
        upper = start
        upper_value, upper_fallbacks = await probability(upper)
        best = upper_value
        while upper_value < target:
            iterations += 1
            if iterations > MAX_EXPANSIONS:
                raise UnreachableTargetError(
                    f"P_gs stays below {target} up to tau={upper:.6g} for N={params.N}", target=target, best=best
                )
            upper *= 2.0
            upper_value, upper_fallbacks = await probability(upper)
            best = max(best, upper_value)

        lower = upper / 2.0
        while lower > MIN_TAU and (await probability(lower))[0] >= target:
            upper, lower = lower, lower / 2.0
            iterations += 1
        while upper / lower - 1.0 > rtol:
            iterations += 1
            middle = math.sqrt(lower * upper)
            value, fallbacks = await probability(middle)
            if value >= target:
                upper, upper_fallbacks = middle, fallbacks
            else:
                lower = middle
        return upper, iterations, upper_fallbacks


def fit_scaling(points: List[Tuple[int, float]]) -> dict:
    """
    Log-log slope of tau*(N) and the residual norms, in tau units, of a power-law fit and of
    a + b ln N.
    """
    if len(points) < 2:
        return {"loglog_slope": None, "power_law_residual": None, "log_fit_residual": None}
    sizes = np.array([N for N, _ in points], dtype=float)
    taus = np.array([tau for _, tau in points], dtype=float)
    slope, intercept = np.polyfit(np.log(sizes), np.log(taus), 1)
    power_law = np.exp(intercept) * sizes**slope
    b, a = np.polyfit(np.log(sizes), taus, 1)
    logarithmic = a + b * np.log(sizes)
    return {
        "loglog_slope": float(slope),
        "power_law_residual": float(np.linalg.norm(taus - power_law)),
        "log_fit_residual": float(np.linalg.norm(taus - logarithmic)),
    }

