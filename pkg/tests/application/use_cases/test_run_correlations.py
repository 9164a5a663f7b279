import pytest
from unittest.mock import AsyncMock

from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.application.use_cases import run_correlations
from nqa_engine.application.use_cases.run_correlations import COLUMNS, RunCorrelationsHandler
from nqa_engine.domain.errors import DeterminantValidityError, ParameterError
from nqa_engine.domain.events import CorrelationEvaluated, DeterminantRejected
from nqa_engine.domain.run_models import ConfigChain, ConfigCorrelations, ConfigRun, ConfigTolerances
from nqa_engine.infrastructure.event_bus.local_event_bus import LocalEventBus
from nqa_engine.infrastructure.executors.process_pool_executor import InlineModeExecutor


def _handler(event_bus, budget=256):
    return RunCorrelationsHandler(ModeEvolutionService(InlineModeExecutor(), event_bus), event_bus, budget)


@pytest.mark.asyncio
async def test_ground_state_shortcut_gives_alternating_correlations():
    # 1. ARRANGE
    event_bus = LocalEventBus()
    config = ConfigRun(
        chain=ConfigChain(N=32, tau=25.0),
        correlations=ConfigCorrelations(max_p=16, ground_state=True),
    ).for_command("correlations")

    # 2. ACT
    record = await _handler(event_bus).execute(config)

    # 3. ASSERT
    assert record.columns == COLUMNS
    assert [row["chi"] for row in record.rows] == [(-1) ** p for p in range(1, 17)]
    assert all(row["error"] is None for row in record.rows)
    assert record.summary["kz_length"] == pytest.approx(0.5**0.5 * 1.25**0.5)


@pytest.mark.asyncio
async def test_numeric_correlations_for_several_dissipation_rates():
    """
    Tests that every configured rate gets max_p rows and one CorrelationEvaluated event,
    with chi(1) inside [-1, 1].
    """
    # 1. ARRANGE
    event_bus = LocalEventBus()
    spy = AsyncMock()
    event_bus.subscribe(CorrelationEvaluated, spy)
    config = ConfigRun(
        chain=ConfigChain(N=16, tau=5.0),
        correlations=ConfigCorrelations(max_p=6, deltas=[0.0, 0.5]),
    ).for_command("correlations")

    # 2. ACT
    record = await _handler(event_bus).execute(config)

    # 3. ASSERT
    assert len(record.rows) == 12
    assert [row["delta"] for row in record.rows] == [0.0] * 6 + [0.5] * 6
    for row in record.rows:
        assert row["G_re"] is not None
        assert row["chi"] is not None
    assert all(-1.0 <= row["chi"] <= 1.0 for row in record.rows if row["p"] == 1)
    assert spy.call_count == 2
    assert set(record.summary["deltas"]) == {"0.0", "0.5"}


@pytest.mark.asyncio
async def test_rejected_determinant_is_recorded_per_row(monkeypatch):
    # 1. ARRANGE
    real_chi = run_correlations.correlation_chi

    def flaky_chi(p, table, budget):
        if p == 2:
            raise DeterminantValidityError("chi(2) has imaginary part 1e-3")
        return real_chi(p, table, budget)

    monkeypatch.setattr(run_correlations, "correlation_chi", flaky_chi)
    event_bus = LocalEventBus()
    spy = AsyncMock()
    event_bus.subscribe(DeterminantRejected, spy)
    config = ConfigRun(
        chain=ConfigChain(N=16, tau=25.0),
        correlations=ConfigCorrelations(max_p=4, ground_state=True),
    ).for_command("correlations")

    # 2. ACT
    record = await _handler(event_bus).execute(config)

    # 3. ASSERT
    assert record.rows[1]["chi"] is None
    assert "imaginary" in record.rows[1]["error"]
    assert record.rows[2]["chi"] == -1.0
    assert record.summary["deltas"]["0.0"]["rejected"] == 1
    spy.assert_called_once()
    assert spy.call_args[0][0].p == 2


@pytest.mark.asyncio
async def test_max_p_beyond_half_chain_or_budget_is_rejected():
    event_bus = LocalEventBus()
    too_far = ConfigRun(
        chain=ConfigChain(N=16), correlations=ConfigCorrelations(max_p=9, ground_state=True)
    ).for_command("correlations")
    over_budget = ConfigRun(
        chain=ConfigChain(N=64),
        tolerances=ConfigTolerances(determinant_budget=10),
        correlations=ConfigCorrelations(max_p=20, ground_state=True),
    ).for_command("correlations")

    with pytest.raises(ParameterError):
        await _handler(event_bus).execute(too_far)
    with pytest.raises(ParameterError):
        await _handler(event_bus).execute(over_budget)
