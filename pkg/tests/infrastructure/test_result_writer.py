import json

import pandas as pd
import pytest

from nqa_engine.domain.run_models import ResultRecord
from nqa_engine.infrastructure.output.result_writer import CsvJsonResultWriter


def _record():
    return ResultRecord(
        config={"command": "defects", "params": {"N": 1024, "tau": 1000.0}},
        summary={"kz_length": 5.000000000000001, "gaussian_regime": True},
        columns=["delta", "density_lerch", "error"],
        rows=[
            {"delta": 0.0, "density_lerch": 0.022507907903927652, "error": None},
            {"delta": 0.25, "density_lerch": 1.0 / 3.0, "error": "quadrature did not converge"},
        ],
        timing={"wall_clock_s": 0.5},
    )


def test_csv_and_json_round_trip(tmp_path):
    # 1. ARRANGE
    writer = CsvJsonResultWriter()
    output = str(tmp_path / "nested" / "run")

    # 2. ACT
    csv_path, json_path = writer.write(_record(), output)

    # 3. ASSERT
    frame = pd.read_csv(csv_path, float_precision="round_trip")
    assert list(frame.columns) == ["delta", "density_lerch", "error"]
    assert frame["density_lerch"].tolist() == [0.022507907903927652, 1.0 / 3.0]
    summary = json.loads(json_path.read_text(encoding="utf-8"))
    assert summary["summary"]["kz_length"] == 5.000000000000001
    assert summary["timing"] == {"wall_clock_s": 0.5}
    assert "rows" not in summary


def test_repeated_writes_are_byte_identical(tmp_path):
    writer = CsvJsonResultWriter()

    first, _ = writer.write(_record(), str(tmp_path / "a"))
    second, _ = writer.write(_record(), str(tmp_path / "b"))

    assert first.read_bytes() == second.read_bytes()


def test_remove_deletes_partial_output(tmp_path):
    writer = CsvJsonResultWriter()
    output = str(tmp_path / "run")
    writer.write(_record(), output)

    writer.remove(output)
    writer.remove(output)

    assert list(tmp_path.iterdir()) == []


def test_non_finite_summary_is_rejected():
    with pytest.raises(ValueError):
        ResultRecord(config={}, summary={"density": float("nan")})
