from abc import ABC, abstractmethod
from typing import Any, Callable, List, Sequence


class IModeExecutor(ABC):
    """
    An interface (Port) for running independent mode computations.
    Implementations must return results in the order of `jobs`.
    """

    @abstractmethod
    async def map(self, fn: Callable[..., Any], jobs: Sequence[tuple]) -> List[Any]:
        """Calls fn(*job) for every job and returns the results in job order."""
        pass

    @abstractmethod
    def close(self) -> None:
        """Releases worker resources."""
        pass
