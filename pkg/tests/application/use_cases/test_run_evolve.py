import math

import pytest
from unittest.mock import AsyncMock

from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.application.use_cases.run_evolve import COLUMNS, RunEvolveHandler
from nqa_engine.domain.errors import ParameterError
from nqa_engine.domain.events import ModesEvolved
from nqa_engine.domain.run_models import ConfigChain, ConfigEvolve, ConfigRun
from nqa_engine.infrastructure.event_bus.local_event_bus import LocalEventBus
from nqa_engine.infrastructure.executors.process_pool_executor import InlineModeExecutor


def _handler(event_bus=None):
    event_bus = event_bus or LocalEventBus()
    return RunEvolveHandler(ModeEvolutionService(InlineModeExecutor(), event_bus), event_bus)


@pytest.mark.asyncio
async def test_sudden_quench_smoke_run():
    """
    Tests the evolve command on a tiny chain with an almost instantaneous anneal:
    every mode keeps its diabatic state and the record holds one row per sample and mode.
    """
    # 1. ARRANGE
    event_bus = LocalEventBus()
    spy = AsyncMock()
    event_bus.subscribe(ModesEvolved, spy)
    config = ConfigRun(
        chain=ConfigChain(N=4, tau=1e-3), sample_count=3, evolve=ConfigEvolve(initial_state="diabatic")
    ).for_command("evolve")

    # 2. ACT
    record = await _handler(event_bus).execute(config)

    # 3. ASSERT
    assert record.columns == COLUMNS
    assert len(record.rows) == 3 * 2
    assert [row["s"] for row in record.rows[::2]] == pytest.approx([0.0, 0.5, 1.0])
    finals = [row["P_gs_k"] for row in record.rows[-2:]]
    assert record.summary["P_gs_total"] == pytest.approx(math.prod(finals), rel=1e-12)
    assert record.rows[-1]["P_gs_total"] == pytest.approx(record.summary["P_gs_total"], rel=1e-12)
    assert record.summary["norm_max_deviation"] < 1e-8
    assert record.config["params"]["N"] == 4
    assert record.config["integrator"]["method"] == "RK45"
    spy.assert_called_once()


@pytest.mark.asyncio
async def test_reported_modes_filter_the_rows():
    config = ConfigRun(
        chain=ConfigChain(N=8, tau=5.0), sample_count=4, evolve=ConfigEvolve(report_modes=[1, 3])
    ).for_command("evolve")

    record = await _handler().execute(config)

    assert len(record.rows) == 4 * 2
    assert {row["mode_index"] for row in record.rows} == {1, 3}
    assert record.summary["modes"] == 4
    assert record.summary["lowest_mode_gap"] > 0.0


@pytest.mark.asyncio
async def test_unknown_reported_mode_is_rejected():
    config = ConfigRun(
        chain=ConfigChain(N=8, tau=5.0), sample_count=4, evolve=ConfigEvolve(report_modes=[5])
    ).for_command("evolve")

    with pytest.raises(ParameterError):
        await _handler().execute(config)


@pytest.mark.asyncio
async def test_dissipation_lifts_the_lowest_modes():
    # 1. ARRANGE
    base = dict(N=32, J=0.5, g=10.0, tau=200.0)
    hermitian = ConfigRun(chain=ConfigChain(**base, delta=0.0), sample_count=2).for_command("evolve")
    dissipative = ConfigRun(chain=ConfigChain(**base, delta=0.5), sample_count=2).for_command("evolve")

    # 2. ACT
    low = await _handler().execute(hermitian)
    high = await _handler().execute(dissipative)

    # 3. ASSERT
    assert high.summary["lowest_mode_probability"] > low.summary["lowest_mode_probability"]
