import json

import pandas as pd
import pytest

from nqa_engine.interface.cli.main import EXIT_CONFIG, EXIT_OK, exit_code_for, main
from nqa_engine.domain.errors import ConfigError, IntegrationError, UnreachableTargetError


@pytest.fixture(autouse=True)
def run_in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


@pytest.mark.asyncio
async def test_scaling_command_writes_csv_and_json(tmp_path, capsys):
    # 1. ARRANGE
    out = tmp_path / "results" / "scaling"
    argv = ["scaling", "--threads", "1", "--out", str(out), "scaling.sizes=[64, 128]", "scaling.deltas=[0.0]"]

    # 2. ACT
    code = await main(argv)

    # 3. ASSERT
    assert code == EXIT_OK
    frame = pd.read_csv(f"{out}.csv")
    assert frame["N"].tolist() == [64, 128]
    record = json.loads((tmp_path / "results" / "scaling.json").read_text(encoding="utf-8"))
    assert record["config"]["command"] == "scaling"
    assert record["config"]["output_path"] == str(out)
    assert record["summary"]["unreachable"] == 0
    assert record["summary"]["deltas"]["0.0"]["loglog_slope"] == pytest.approx(2.0, rel=1e-9)
    assert record["timing"]["wall_clock_s"] >= 0.0
    assert "Wrote" in capsys.readouterr().out


@pytest.mark.asyncio
async def test_missing_configuration_exits_with_config_code(tmp_path, capsys):
    code = await main(["defects", "--threads", "1", "--config", str(tmp_path / "absent.yaml")])

    assert code == EXIT_CONFIG
    assert "ConfigError" in capsys.readouterr().err


@pytest.mark.asyncio
async def test_invalid_section_leaves_no_output(tmp_path):
    out = tmp_path / "bad"

    code = await main(["scaling", "--threads", "1", "--out", str(out), "scaling.sizes=[64, 65]"])

    assert code == EXIT_CONFIG
    assert not (tmp_path / "bad.csv").exists()
    assert not (tmp_path / "bad.json").exists()


def test_exit_codes_follow_error_kind():
    assert exit_code_for(ConfigError("broken")) == 2
    assert exit_code_for(IntegrationError("step size underflow", 1.0, 0.5)) == 3
    assert exit_code_for(UnreachableTargetError("never", target=0.99, best=0.5)) == 4


@pytest.mark.asyncio
async def test_worker_count_does_not_change_the_results(tmp_path):
    """
    Tests that an evolve run spread over several chunks writes the same CSV bytes inline
    and on a pool of four worker processes.
    """
    # 1. ARRANGE
    overrides = ["chain.N=256", "chain.tau=50", "chain.delta=0.25", "sample_count=5"]
    inline, pooled = tmp_path / "inline", tmp_path / "pooled"

    # 2. ACT
    inline_code = await main(["evolve", "--threads", "1", "--out", str(inline), *overrides])
    pooled_code = await main(["evolve", "--threads", "4", "--out", str(pooled), *overrides])

    # 3. ASSERT
    assert inline_code == pooled_code == EXIT_OK
    assert (tmp_path / "inline.csv").read_bytes() == (tmp_path / "pooled.csv").read_bytes()
