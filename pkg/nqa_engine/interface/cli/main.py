import argparse
import sys
import time
from pathlib import Path
from typing import List, Optional

from dependency_injector import providers
from pydantic import ValidationError

from nqa_engine.container import container, wire_dependencies
from nqa_engine.domain.errors import (
    ConfigError,
    NQAError,
    NumericalError,
    ParameterError,
    UnreachableTargetError,
)
from nqa_engine.domain.events import RunCompleted, RunFailed
from nqa_engine.infrastructure.executors.process_pool_executor import create_mode_executor

# --- Constants ---
COMMANDS = ["evolve", "sweep-tau", "correlations", "defects", "scaling"]
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_UNREACHABLE = 4

HANDLERS = {
    "evolve": container.run_evolve_handler,
    "sweep-tau": container.run_sweep_tau_handler,
    "correlations": container.run_correlations_handler,
    "defects": container.run_defects_handler,
    "scaling": container.run_scaling_handler,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nqa",
        description="Hermitian and non-Hermitian quantum annealing of the antiferromagnetic Ising chain.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, default=None, help="YAML run configuration")
    parser.add_argument("--threads", type=int, default=None, help="worker processes for the mode pool")
    parser.add_argument("--out", default=None, help="output path prefix; .csv and .json are appended")
    parser.add_argument("overrides", nargs="*", metavar="key=value", help="e.g. chain.tau=25 or delta=0.25")
    return parser


def exit_code_for(error: Exception) -> int:
    if isinstance(error, UnreachableTargetError):
        return EXIT_UNREACHABLE
    if isinstance(error, (ConfigError, ParameterError, ValidationError)):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


async def main(argv: Optional[List[str]] = None) -> int:
    """Runs one command and returns the process exit code."""
    args = build_parser().parse_intermixed_args(argv)
    wire_dependencies()
    if args.threads is not None:
        container.mode_executor.override(providers.Singleton(create_mode_executor, threads=args.threads))

    event_bus = container.event_bus()
    writer = container.result_writer()
    output_path: Optional[str] = None
    started = time.perf_counter()
    try:
        config_run = container.run_config_loader().load(args.config, args.overrides)
        if args.out is not None:
            config_run = config_run.model_copy(update={"output_path": args.out})
        run_config = config_run.for_command(args.command)
        output_path = run_config.output_path

        handler = HANDLERS[args.command]()
        record = await handler.execute(run_config)
        duration = time.perf_counter() - started
        record = record.model_copy(update={"timing": {"wall_clock_s": duration}})
        paths = writer.write(record, output_path)

        await event_bus.publish(RunCompleted(command=args.command, output_path=output_path, duration_s=duration))
        print(f"Wrote {', '.join(str(path) for path in paths)}")
        if record.summary.get("unreachable"):
            print(f"Target not reached for {record.summary['unreachable']} configuration(s).", file=sys.stderr)
            return EXIT_UNREACHABLE
        return EXIT_OK
    except (NQAError, ValidationError) as error:
        if output_path is not None:
            writer.remove(output_path)
        message = str(error)
        await event_bus.publish(RunFailed(command=args.command, error_type=type(error).__name__, message=message))
        print(f"{type(error).__name__}: {message}", file=sys.stderr)
        return exit_code_for(error)
    finally:
        container.mode_executor().close()
        if args.threads is not None:
            container.mode_executor.reset_override()
