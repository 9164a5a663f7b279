import asyncio
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Optional, Sequence

from nqa_engine.application.ports.mode_executor import IModeExecutor


class InlineModeExecutor(IModeExecutor):
    """Runs every job in the calling process, one after the other."""

    async def map(self, fn: Callable[..., Any], jobs: Sequence[tuple]) -> List[Any]:
        return [fn(*job) for job in jobs]

    def close(self) -> None:
        pass


class ProcessPoolModeExecutor(IModeExecutor):
    """
    Spreads jobs over a pool of worker processes. `fn` and the job arguments must be
    picklable; results come back in job order whatever order the workers finish in.
    """

    def __init__(self, workers: int):
        if workers < 1:
            raise ValueError(f"A process pool needs at least one worker, got {workers}")
        self.workers = workers
        self._pool: Optional[ProcessPoolExecutor] = None

    def _ensure_pool(self) -> ProcessPoolExecutor:
        if self._pool is None:
            self._pool = ProcessPoolExecutor(max_workers=self.workers)
        return self._pool

    async def map(self, fn: Callable[..., Any], jobs: Sequence[tuple]) -> List[Any]:
        loop = asyncio.get_running_loop()
        pool = self._ensure_pool()
        futures = [loop.run_in_executor(pool, fn, *job) for job in jobs]
        return list(await asyncio.gather(*futures))

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True, cancel_futures=True)
            self._pool = None


def create_mode_executor(threads: int) -> IModeExecutor:
    """One worker runs inline; more than one gets a process pool."""
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    if threads == 1:
        return InlineModeExecutor()
    return ProcessPoolModeExecutor(threads)
