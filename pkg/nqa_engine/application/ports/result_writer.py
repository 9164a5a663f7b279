from abc import ABC, abstractmethod
from pathlib import Path
from typing import List

from nqa_engine.domain.run_models import ResultRecord


class IResultWriter(ABC):
    """An interface (Port) for persisting run results."""

    @abstractmethod
    def write(self, record: ResultRecord, output_path: str) -> List[Path]:
        """Writes the series and the summary of a run; returns the files written."""
        pass

    @abstractmethod
    def remove(self, output_path: str) -> None:
        """Deletes whatever a failed run may have left at output_path."""
        pass
