import pytest
from unittest.mock import AsyncMock

from nqa_engine.domain.events import DomainEvent, RunCompleted, TauBracketed
from nqa_engine.infrastructure.event_bus.local_event_bus import LocalEventBus


@pytest.mark.asyncio
async def test_handlers_receive_matching_events_only():
    # 1. ARRANGE
    bus = LocalEventBus()
    everything = AsyncMock()
    tau_only = AsyncMock()
    bus.subscribe(DomainEvent, everything)
    bus.subscribe(TauBracketed, tau_only)

    # 2. ACT
    await bus.publish(TauBracketed(N=64, target=0.99, tau_star=120.0, iterations=9))
    await bus.publish(RunCompleted(command="scaling", output_path="out", duration_s=0.1))

    # 3. ASSERT
    assert everything.call_count == 2
    tau_only.assert_called_once()
    assert tau_only.call_args[0][0].name == "tau.bracketed"


@pytest.mark.asyncio
async def test_publish_without_subscribers_is_a_no_op():
    await LocalEventBus().publish(RunCompleted(command="defects", output_path="out", duration_s=0.0))
