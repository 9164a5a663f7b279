import math

import pytest
from unittest.mock import AsyncMock

from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.application.services.mode_probability_service import ModeProbabilityService
from nqa_engine.application.use_cases.run_sweep_tau import RunSweepTauHandler, fit_scaling
from nqa_engine.domain.analytic import annealing_time_estimate
from nqa_engine.domain.errors import DegenerateStateError
from nqa_engine.domain.events import SizeFailed, TargetUnreachable, TauBracketed
from nqa_engine.domain.run_models import ConfigChain, ConfigRun, ConfigSweepTau
from nqa_engine.domain.value_objects import ChainParams
from nqa_engine.infrastructure.event_bus.local_event_bus import LocalEventBus
from nqa_engine.infrastructure.executors.process_pool_executor import InlineModeExecutor


def test_fit_scaling_of_a_pure_power_law():
    points = [(N, 3.0 * N**2) for N in (64, 128, 256, 512)]

    fit = fit_scaling(points)

    assert fit["loglog_slope"] == pytest.approx(2.0, rel=1e-10)
    assert fit["power_law_residual"] < 1e-6 * 3.0 * 512**2
    assert fit["log_fit_residual"] > fit["power_law_residual"]


def test_fit_scaling_of_a_logarithm():
    points = [(N, 100.0 + 400.0 * math.log(N)) for N in (64, 128, 256, 512, 1024)]

    fit = fit_scaling(points)

    assert fit["log_fit_residual"] < 1e-6
    assert fit["log_fit_residual"] < fit["power_law_residual"]


def test_dissipative_annealing_time_grows_logarithmically():
    """
    Tests the lowest-mode annealing times of sizes 64..1024 at delta = 0.25: the largest chain
    needs less than ten times the time of the smallest, and a + b ln N fits better than a power law.
    """
    # 1. ARRANGE
    params = ChainParams(N=64, J=0.5, g=10.0, delta=0.25, tau=1.0)
    sizes = [64, 128, 256, 512, 1024]

    # 2. ACT
    points = [(N, annealing_time_estimate(N, params, 0.99).tau_star) for N in sizes]
    fit = fit_scaling(points)

    # 3. ASSERT
    assert points[-1][1] / points[0][1] < 10.0
    assert fit["log_fit_residual"] < fit["power_law_residual"]
    assert fit["loglog_slope"] < 0.5


def test_fit_scaling_needs_two_sizes():
    assert fit_scaling([(64, 10.0)])["loglog_slope"] is None


@pytest.mark.asyncio
async def test_numeric_bisection_reaches_the_target():
    """
    Tests the sweep with the ODE engine: each size gets a tau* at which the integrated
    system probability meets the target, next to the closed-form estimate.
    """
    # 1. ARRANGE
    event_bus = LocalEventBus()
    spy = AsyncMock()
    event_bus.subscribe(TauBracketed, spy)
    executor = InlineModeExecutor()
    probabilities = ModeProbabilityService(executor, event_bus)
    handler = RunSweepTauHandler(probabilities, ModeEvolutionService(executor, event_bus), event_bus)
    config = ConfigRun(
        chain=ConfigChain(J=0.5, g=10.0),
        sweep_tau=ConfigSweepTau(sizes=[8, 12], target=0.9, engine="ode", tau_rtol=1e-3),
    ).for_command("sweep-tau")

    # 2. ACT
    record = await handler.execute(config)

    # 3. ASSERT
    assert [row["N"] for row in record.rows] == [8, 12]
    assert spy.call_count == 2
    assert record.summary["unreachable"] == 0
    assert record.summary["loglog_slope"] is not None
    for row in record.rows:
        assert row["error"] is None
        assert row["tau_star_analytic"] > 0
        params = ChainParams(N=row["N"], J=0.5, g=10.0, tau=row["tau_star_numeric"])
        reached, _ = await probabilities.system_probability(params, "ode", handler._evolution.options_for())
        assert reached >= 0.9


@pytest.mark.asyncio
async def test_unreachable_target_is_flagged_without_aborting():
    # 1. ARRANGE
    event_bus = LocalEventBus()
    spy = AsyncMock()
    event_bus.subscribe(TargetUnreachable, spy)
    probabilities = AsyncMock(spec=ModeProbabilityService)
    probabilities.system_probability.return_value = (0.5, 0)
    handler = RunSweepTauHandler(
        probabilities, ModeEvolutionService(InlineModeExecutor(), event_bus), event_bus
    )
    config = ConfigRun(
        chain=ConfigChain(J=0.5, g=10.0),
        sweep_tau=ConfigSweepTau(sizes=[8, 16], target=0.9),
    ).for_command("sweep-tau")

    # 2. ACT
    record = await handler.execute(config)

    # 3. ASSERT
    assert record.summary["unreachable"] == 2
    assert all(row["tau_star_numeric"] is None for row in record.rows)
    assert all("below" in row["error"] for row in record.rows)
    assert spy.call_count == 2
    assert spy.call_args[0][0].best == 0.5


@pytest.mark.asyncio
async def test_numerical_failure_is_flagged_on_its_row_and_the_sweep_continues():
    """
    Tests that a size whose probability evaluation breaks down is reported on its own row and
    through a SizeFailed event, while the remaining sizes are still bisected.
    """
    # 1. ARRANGE
    event_bus = LocalEventBus()
    spy = AsyncMock()
    event_bus.subscribe(SizeFailed, spy)

    def system_probability(params, engine, options):
        if params.N == 8:
            raise DegenerateStateError("Both adiabatic amplitudes decayed")
        return 0.95, 0

    probabilities = AsyncMock(spec=ModeProbabilityService)
    probabilities.system_probability.side_effect = system_probability
    handler = RunSweepTauHandler(
        probabilities, ModeEvolutionService(InlineModeExecutor(), event_bus), event_bus
    )
    config = ConfigRun(
        chain=ConfigChain(J=0.5, g=10.0, delta=0.25),
        sweep_tau=ConfigSweepTau(sizes=[8, 16], target=0.9),
    ).for_command("sweep-tau")

    # 2. ACT
    record = await handler.execute(config)

    # 3. ASSERT
    failed, reached = record.rows
    assert failed["tau_star_numeric"] is None
    assert failed["error"].startswith("DegenerateStateError:")
    assert reached["tau_star_numeric"] is not None
    assert reached["error"] is None
    assert record.summary["unreachable"] == 1
    assert spy.call_count == 1
    assert spy.call_args[0][0].N == 8
    assert spy.call_args[0][0].error_type == "DegenerateStateError"
