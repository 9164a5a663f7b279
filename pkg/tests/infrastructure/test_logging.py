import logging

import pytest
from unittest.mock import Mock

from nqa_engine.application.ports.logger import ILogger
from nqa_engine.domain.events import (
    DefectRowComputed,
    DeterminantRejected,
    ModesEvolved,
    RunFailed,
    SizeFailed,
    TargetUnreachable,
)
from nqa_engine.infrastructure.event_bus.local_event_bus import LocalEventBus
from nqa_engine.infrastructure.logging.event_handler import LoggingEventHandler
from nqa_engine.infrastructure.logging.file_logger import FileLogger


@pytest.mark.asyncio
async def test_events_are_logged_at_matching_levels():
    # 1. ARRANGE
    logger = Mock(spec=ILogger)
    bus = LocalEventBus()
    LoggingEventHandler(logger).subscribe(bus)

    # 2. ACT
    await bus.publish(ModesEvolved(N=64, first_index=1, last_index=32, delta=0.0, tau=10.0))
    await bus.publish(TargetUnreachable(N=64, target=0.99, best=0.5))
    await bus.publish(DeterminantRejected(delta=0.25, p=40, reason="imaginary part"))
    await bus.publish(DefectRowComputed(delta=0.5, density=0.01))
    await bus.publish(RunFailed(command="evolve", error_type="IntegrationError", message="step size"))

    # 3. ASSERT
    assert "modes 1..32" in logger.debug.call_args[0][0]
    assert logger.warning.call_count == 2
    assert "density=0.01" in logger.info.call_args[0][0]
    assert "IntegrationError" in logger.error.call_args[0][0]


@pytest.mark.asyncio
async def test_failed_size_is_logged_as_a_warning():
    logger = Mock(spec=ILogger)
    bus = LocalEventBus()
    LoggingEventHandler(logger).subscribe(bus)

    await bus.publish(SizeFailed(N=128, error_type="DegenerateStateError", message="amplitudes decayed"))

    assert logger.warning.call_args[0][0] == "SIZE FAILED: N=128 DegenerateStateError: amplitudes decayed"

@pytest.mark.asyncio
async def test_handler_errors_are_logged_not_raised():
    logger = Mock(spec=ILogger)
    logger.info.side_effect = [RuntimeError("disk full"), None]
    handler = LoggingEventHandler(logger)

    await handler.handle(DefectRowComputed(delta=0.5, density=0.01))

    assert "disk full" in logger.error.call_args[0][0]


def test_file_logger_writes_formatted_lines(tmp_path):
    # 1. ARRANGE
    named = logging.getLogger("NQA_Engine_Logger")
    for handler in list(named.handlers):
        named.removeHandler(handler)
    log_file = tmp_path / "nqa.log"

    # 2. ACT
    logger = FileLogger(log_file=str(log_file), level="DEBUG")
    logger.info("TAU BRACKETED: N=64")
    for handler in logger.logger.handlers:
        handler.flush()

    # 3. ASSERT
    assert " - INFO - TAU BRACKETED: N=64" in log_file.read_text(encoding="utf-8")
    for handler in list(named.handlers):
        handler.close()
        named.removeHandler(handler)
