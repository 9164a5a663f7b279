from dependency_injector import containers, providers

from nqa_engine.application.services.mode_evolution_service import ModeEvolutionService
from nqa_engine.application.services.mode_probability_service import ModeProbabilityService
from nqa_engine.application.use_cases.run_correlations import RunCorrelationsHandler
from nqa_engine.application.use_cases.run_defects import RunDefectsHandler
from nqa_engine.application.use_cases.run_evolve import RunEvolveHandler
from nqa_engine.application.use_cases.run_scaling import RunScalingHandler
from nqa_engine.application.use_cases.run_sweep_tau import RunSweepTauHandler
from nqa_engine.infrastructure.config.run_config_loader import RunConfigLoader
from nqa_engine.infrastructure.config.settings import settings
from nqa_engine.infrastructure.event_bus.local_event_bus import LocalEventBus
from nqa_engine.infrastructure.executors.process_pool_executor import create_mode_executor
from nqa_engine.infrastructure.logging.event_handler import LoggingEventHandler
from nqa_engine.infrastructure.logging.file_logger import FileLogger
from nqa_engine.infrastructure.output.result_writer import CsvJsonResultWriter


class Container(containers.DeclarativeContainer):
    """
    The Dependency Injection (DI) container for the application.
    It wires together the different components of the system.
    """

    # =====================================================================
    # Infrastructure Layer
    # =====================================================================
    event_bus = providers.Singleton(LocalEventBus)
    logger = providers.Singleton(FileLogger, log_file=settings.engine.log_file, level=settings.engine.log_level)
    run_config_loader = providers.Singleton(RunConfigLoader, default_sample_count=settings.engine.sample_count)
    result_writer = providers.Singleton(CsvJsonResultWriter)
    mode_executor = providers.Singleton(create_mode_executor, threads=settings.engine.threads)

    # =====================================================================
    # Application Layer (Services)
    # =====================================================================
    mode_evolution_service = providers.Singleton(
        ModeEvolutionService,
        executor=mode_executor,
        event_bus=event_bus,
        method=settings.engine.ode_method,
        rtol=settings.engine.rtol,
        atol=settings.engine.atol,
        tracking_points=settings.engine.tracking_points,
        chunk_size=settings.engine.chunk_size,
    )

    mode_probability_service = providers.Singleton(
        ModeProbabilityService,
        executor=mode_executor,
        event_bus=event_bus,
        chunk_size=settings.engine.chunk_size,
    )

    # =====================================================================
    # Application Layer (Use Case Handlers)
    # =====================================================================
    run_evolve_handler = providers.Factory(
        RunEvolveHandler,
        evolution_service=mode_evolution_service,
        event_bus=event_bus,
    )

    run_sweep_tau_handler = providers.Factory(
        RunSweepTauHandler,
        probability_service=mode_probability_service,
        evolution_service=mode_evolution_service,
        event_bus=event_bus,
    )

    run_correlations_handler = providers.Factory(
        RunCorrelationsHandler,
        evolution_service=mode_evolution_service,
        event_bus=event_bus,
        determinant_budget=settings.engine.determinant_budget,
    )

    run_defects_handler = providers.Factory(
        RunDefectsHandler,
        evolution_service=mode_evolution_service,
        event_bus=event_bus,
    )

    run_scaling_handler = providers.Factory(
        RunScalingHandler,
        event_bus=event_bus,
    )

    # =====================================================================
    # Logging
    # =====================================================================
    logging_event_handler = providers.Singleton(
        LoggingEventHandler,
        logger=logger,
    )


# A global instance of the container
container = Container()


def wire_dependencies():
    """
    Connects (wires) the components together.
    This function should be called once at application startup.
    """
    logging_handler = container.logging_event_handler()
    event_bus = container.event_bus()
    logging_handler.subscribe(event_bus)
