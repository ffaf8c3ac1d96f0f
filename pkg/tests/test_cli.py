import json

import pytest

from cli.main import main
from coordinator.config import CONFIGS_DIR, HISTORY_HEADER

SMALL_TRAIN = """\
preset = toy
vocab_size = 8
context_len = 6
relevant_set_size = 3
num_train = 32
num_eval = 16
epochs = 2
batch_size = 8
warmup_steps = 2
alpha = 1.5
beta = 1
lambda_sced = 0.1
lambda_kl = 0.1
seed = 3
"""


@pytest.fixture
def train_conf(tmp_path):
    path = tmp_path / "small.conf"
    path.write_text(SMALL_TRAIN)
    return path


class TestGradcheck:
    def test_coarse_step_fails(self, capsys):
        assert main(["--plain", "gradcheck", "--config", str(CONFIGS_DIR / "gradcheck_coarse.conf")]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_missing_config(self, tmp_path):
        assert main(["gradcheck", "--config", str(tmp_path / "absent.conf")]) == 2

    def test_bad_config(self, tmp_path):
        path = tmp_path / "bad.conf"
        path.write_text("alphas = 0.5\n")
        assert main(["gradcheck", "--config", str(path)]) == 2

    def test_bad_threshold(self):
        assert main(["gradcheck", "--threshold", "-1"]) == 2

    @pytest.mark.slow
    def test_default_audit_passes(self, capsys):
        assert main(["--plain", "gradcheck"]) == 0
        assert "PASS" in capsys.readouterr().out


class TestTrain:
    def test_writes_outputs(self, train_conf, tmp_path):
        out = tmp_path / "run"
        assert main(["--plain", "train", "--config", str(train_conf), "--out", str(out)]) == 0
        for name in ("train.tsv", "eval.tsv", "history.csv", "model.bin", "model.shape"):
            assert (out / name).is_file()
        lines = (out / "history.csv").read_text().splitlines()
        assert lines[0] == ",".join(HISTORY_HEADER)
        assert len(lines) == 3
        assert (out / "model.shape").read_text() == "8 16\n"
        assert len((out / "eval.tsv").read_text().splitlines()) == 16

    def test_rerun_is_byte_identical(self, train_conf, tmp_path):
        for run in ("a", "b"):
            assert main(["--plain", "train", "--config", str(train_conf), "--out", str(tmp_path / run)]) == 0
        for name in ("train.tsv", "eval.tsv", "history.csv", "model.bin", "model.shape"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_unwritable_output(self, train_conf, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["train", "--config", str(train_conf), "--out", str(blocker)]) == 2

    @pytest.mark.slow
    def test_reference_config_final_accuracy_is_pinned(self, tmp_path, pinned):
        out = tmp_path / "toy"
        assert main(["--plain", "train", "--config", str(CONFIGS_DIR / "toy.conf"), "--out", str(out)]) == 0
        header, *rows = (out / "history.csv").read_text().splitlines()
        final = dict(zip(header.split(","), rows[-1].split(",")))
        pinned("toy_reference_train", {"accuracy": float(final["accuracy"]), "total": float(final["total"])})


class TestSweepAndReport:
    def test_small_sweep_then_report(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        assert main(["--plain", "sweep", "--config", str(CONFIGS_DIR / "sweep_small.conf"),
                     "--out", str(out), "--jobs", "1"]) == 0
        assert len((out / "sweep.csv").read_text().splitlines()) == 3

        capsys.readouterr()
        assert main(["--plain", "report", str(out / "sweep.csv"), "--out", str(out)]) == 0
        table = capsys.readouterr().out
        assert "accuracy" in table and "±" in table
        summary = json.loads((out / "summary.json").read_text())
        assert [cell["beta"] for cell in summary["cells"]] == [0.0, 2.0]
        assert all(cell["n_seeds"] == 1 and cell["accuracy_std"] == 0.0 for cell in summary["cells"])

    def test_report_header_mismatch(self, tmp_path):
        path = tmp_path / "sweep.csv"
        path.write_text("a,b,c\n1,2,3\n")
        assert main(["report", str(path)]) == 2

    def test_report_missing_file(self, tmp_path):
        assert main(["report", str(tmp_path / "none.csv")]) == 2

    def test_report_accepts_config_flag(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        assert main(["--plain", "sweep", "--config", str(CONFIGS_DIR / "sweep_small.conf"),
                     "--out", str(out), "--jobs", "1"]) == 0
        capsys.readouterr()
        assert main(["--plain", "report", "--config", str(out / "sweep.csv")]) == 0
        assert "accuracy" in capsys.readouterr().out

    def test_report_needs_exactly_one_source(self, tmp_path):
        path = tmp_path / "sweep.csv"
        assert main(["report"]) == 2
        assert main(["report", str(path), "--config", str(path)]) == 2


def test_compare_all_witnesses_agree(capsys):
    assert main(["--plain", "compare"]) == 0
    out = capsys.readouterr().out
    assert "sced" in out and "sparsemax" in out
    assert "DISAGREE" not in out


def test_usage_errors():
    assert main([]) == 2
    assert main(["bogus"]) == 2
    assert main(["train"]) == 2
