import json

import pytest

from coordinator.config import HISTORY_HEADER, SWEEP_HEADER
from coordinator.state_schema import (
    EpochRecord,
    LossBreakdown,
    MetricsReport,
    RunRecord,
    RunStatus,
    TrainHistory,
)
from utils.errors import ConfigError
from utils.snapshot import read_sweep_csv, write_history_csv, write_json, write_sweep_csv


def _record(seed, status=RunStatus.OK):
    record = RunRecord(alpha=1.0, beta=2.0, lambda_sced=0.1, lambda_kl=0.0, seed=seed, status=status,
                       wall_time_seconds=0.25)
    if status is RunStatus.OK:
        record.metrics = MetricsReport(accuracy=0.75, mean_entropy=0.5, mean_effective_support=1.5,
                                       mean_topk_mass=0.9, mean_kl_uniform=2.0, n_items=4)
        record.loss = LossBreakdown(ce=0.1, sced=0.2, kl=0.3, total=0.13)
    else:
        record.error = "training diverged at step 3"
    return record


def test_sweep_csv_round_trip(tmp_path):
    path = write_sweep_csv([_record(1), _record(0, RunStatus.DIVERGED)], tmp_path / "sweep.csv")
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(SWEEP_HEADER)
    assert "\r" not in text
    rows = read_sweep_csv(path)
    assert [r["seed"] for r in rows] == ["0", "1"]
    assert rows[0]["status"] == "diverged" and rows[0]["accuracy"] == ""
    assert rows[1]["accuracy"] == "0.75"
    assert rows[1]["total"] == "0.13"


def test_header_mismatch(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text("alpha,beta\n1,2\n")
    with pytest.raises(ConfigError, match=r"sweep.csv:1"):
        read_sweep_csv(path)


def test_ragged_row_names_line(tmp_path):
    path = write_sweep_csv([_record(0), _record(1)], tmp_path / "sweep.csv")
    lines = path.read_text().splitlines()
    lines[2] = "1.0,2.0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ConfigError, match=r"sweep.csv:3"):
        read_sweep_csv(path)


def test_empty_and_missing_file(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ConfigError, match="empty file"):
        read_sweep_csv(empty)
    with pytest.raises(ConfigError, match="cannot read"):
        read_sweep_csv(tmp_path / "absent.csv")


def test_history_csv(tmp_path):
    history = TrainHistory(records=[
        EpochRecord(epoch=e, ce=1.0 / e, sced=0.1, kl=0.2, total=1.0, accuracy=0.5, mean_entropy=1.0,
                    mean_effective_support=2.0, mean_topk_mass=0.9, mean_kl_uniform=0.3)
        for e in (1, 2)
    ])
    lines = write_history_csv(history, tmp_path / "history.csv").read_text().splitlines()
    assert lines[0] == ",".join(HISTORY_HEADER)
    assert lines[2].split(",")[:2] == ["2", "0.5"]
    assert len(lines) == 3


def test_json_is_sorted(tmp_path):
    path = write_json({"b": 1, "a": [1.5]}, tmp_path / "out" / "summary.json")
    assert json.loads(path.read_text()) == {"a": [1.5], "b": 1}
    assert path.read_text().index('"a"') < path.read_text().index('"b"')
