from nqa_engine.application.ports.event_bus import IEventBus
from nqa_engine.application.ports.logger import ILogger
from nqa_engine.domain.events import (
    CorrelationEvaluated,
    DefectRowComputed,
    DeterminantRejected,
    DomainEvent,
    ModesEvolved,
    RunCompleted,
    RunFailed,
    SizeFailed,
    TargetUnreachable,
    TauBracketed,
)


class LoggingEventHandler:
    """
    An event handler that writes domain events to the run log.
    """

    def __init__(self, logger: ILogger):
        self._logger = logger

    async def handle(self, event: DomainEvent):
        """Generic handler that dispatches on the event type."""
        try:
            if isinstance(event, ModesEvolved):
                self._logger.debug(
                    f"MODES EVOLVED: N={event.N} modes {event.first_index}..{event.last_index} "
                    f"(delta={event.delta}, tau={event.tau}, engine={event.engine})"
                )
            elif isinstance(event, TauBracketed):
                self._logger.info(
                    f"TAU BRACKETED: N={event.N} reaches P_gs={event.target} at tau*={event.tau_star:.6g} "
                    f"after {event.iterations} iterations"
                )
            elif isinstance(event, TargetUnreachable):
                self._logger.warning(f"TARGET UNREACHABLE: N={event.N} target={event.target} best={event.best}")
            elif isinstance(event, SizeFailed):
                self._logger.warning(f"SIZE FAILED: N={event.N} {event.error_type}: {event.message}")
            elif isinstance(event, CorrelationEvaluated):
                self._logger.info(
                    f"CORRELATIONS: delta={event.delta} max_p={event.max_p} "
                    f"phase0={event.phase0} period={event.period}"
                )
            elif isinstance(event, DeterminantRejected):
                self._logger.warning(f"DETERMINANT REJECTED: delta={event.delta} p={event.p}: {event.reason}")
            elif isinstance(event, DefectRowComputed):
                if event.error:
                    self._logger.warning(f"DEFECTS: delta={event.delta} density={event.density:.6g} ({event.error})")
                else:
                    self._logger.info(f"DEFECTS: delta={event.delta} density={event.density:.6g}")
            elif isinstance(event, RunCompleted):
                self._logger.info(
                    f"RUN COMPLETED: '{event.command}' wrote {event.output_path} in {event.duration_s:.3f}s"
                )
            elif isinstance(event, RunFailed):
                self._logger.error(f"RUN FAILED: '{event.command}' {event.error_type}: {event.message}")
            else:
                self._logger.debug(f"Received unknown event type: {type(event).__name__}")
        except Exception as e:
            self._logger.error(f"Error in LoggingEventHandler: {e}")

    def subscribe(self, event_bus: IEventBus):
        """Subscribes the handler to all events on the event bus."""
        event_bus.subscribe(DomainEvent, self.handle)
