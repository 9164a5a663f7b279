import math

import pytest
from unittest.mock import AsyncMock

from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.application.use_cases import run_defects
from nqa_engine.application.use_cases.run_defects import RunDefectsHandler
from nqa_engine.domain.errors import QuadratureError
from nqa_engine.domain.events import DefectRowComputed
from nqa_engine.domain.run_models import ConfigChain, ConfigDefects, ConfigRun
from nqa_engine.infrastructure.event_bus.local_event_bus import LocalEventBus
from nqa_engine.infrastructure.executors.process_pool_executor import InlineModeExecutor


def _handler(event_bus):
    return RunDefectsHandler(ModeEvolutionService(InlineModeExecutor(), event_bus), event_bus)


@pytest.mark.asyncio
async def test_closed_form_defect_rows():
    """
    Tests the analytic defect table: the Hermitian row equals n0, the density falls with
    dissipation and the defect number falls as exp(-10 delta).
    """
    # 1. ARRANGE
    event_bus = LocalEventBus()
    spy = AsyncMock()
    event_bus.subscribe(DefectRowComputed, spy)
    config = ConfigRun(
        chain=ConfigChain(N=1024, J=0.5, g=10.0, tau=1000.0),
        defects=ConfigDefects(deltas=[0.0, 0.25, 0.5, 1.0], numeric=False),
    ).for_command("defects")

    # 2. ACT
    record = await _handler(event_bus).execute(config)

    # 3. ASSERT
    rows = record.rows
    assert rows[0]["density_lerch"] == rows[0]["n0"]
    assert rows[0]["ratio_to_n0"] == 1.0
    densities = [row["density_lerch"] for row in rows]
    assert all(a > b for a, b in zip(densities, densities[1:]))
    for row in rows[1:]:
        assert row["n_bar_analytic"] / rows[0]["n_bar_analytic"] == pytest.approx(
            math.exp(-10.0 * row["delta"]), rel=1e-12
        )
        assert row["regime"] == "dissipative"
        assert row["n_bar"] is None
    assert spy.call_count == 4
    assert record.summary["rows_with_errors"] == 0


@pytest.mark.asyncio
async def test_numeric_defects_are_included_when_requested():
    config = ConfigRun(
        chain=ConfigChain(N=16, tau=30.0),
        defects=ConfigDefects(deltas=[0.0, 0.5], numeric=True),
    ).for_command("defects")

    record = await _handler(LocalEventBus()).execute(config)

    for row in record.rows:
        assert row["n_bar"] == pytest.approx(row["density_chi"] * 16, rel=1e-9)
    assert record.rows[1]["n_bar"] < record.rows[0]["n_bar"]


@pytest.mark.asyncio
async def test_quadrature_failure_is_not_fatal(monkeypatch):
    # 1. ARRANGE
    def failing_density(params, finals=None):
        raise QuadratureError("did not converge")

    monkeypatch.setattr(run_defects, "defect_density", failing_density)
    event_bus = LocalEventBus()
    spy = AsyncMock()
    event_bus.subscribe(DefectRowComputed, spy)
    config = ConfigRun(
        chain=ConfigChain(N=1024, tau=1000.0),
        defects=ConfigDefects(deltas=[0.25], numeric=False),
    ).for_command("defects")

    # 2. ACT
    record = await _handler(event_bus).execute(config)

    # 3. ASSERT
    row = record.rows[0]
    assert row["density_quadrature"] is None
    assert row["density_lerch"] > 0
    assert "did not converge" in row["error"]
    assert record.summary["rows_with_errors"] == 1
    assert spy.call_args[0][0].error == row["error"]
