from pathlib import Path
from typing import List

import pandas as pd

from nqa_engine.application.ports.result_writer import IResultWriter
from nqa_engine.domain.run_models import ResultRecord


class CsvJsonResultWriter(IResultWriter):
    """
    Writes `<output_path>.csv` with the series rows and `<output_path>.json` with the
    configuration echo, the summary and the timing.

    Floats are written with 17 significant digits so that reruns with the same inputs
    produce byte-identical CSV files.
    """

    @staticmethod
    def paths(output_path: str) -> List[Path]:
        base = Path(output_path)
        return [base.with_name(base.name + ".csv"), base.with_name(base.name + ".json")]

    def write(self, record: ResultRecord, output_path: str) -> List[Path]:
        csv_path, json_path = self.paths(output_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)

        frame = pd.DataFrame(record.rows, columns=record.columns)
        frame.to_csv(csv_path, index=False, float_format="%.17g", lineterminator="\n")
        json_path.write_text(record.model_dump_json(indent=2), encoding="utf-8")
        return [csv_path, json_path]

    def remove(self, output_path: str) -> None:
        for path in self.paths(output_path):
            path.unlink(missing_ok=True)
