import json
from pathlib import Path

import numpy as np
import pytest

from coordinator.state_schema import SynthTaskConfig, TrainConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_task():
    return SynthTaskConfig(vocab_size=8, context_len=6, relevant_set_size=3, num_train=48, num_eval=32, seed=3)


@pytest.fixture
def quick_cfg():
    return TrainConfig.from_flat({
        "lr": 1e-2, "batch_size": 8, "epochs": 3, "warmup_steps": 4, "embed_dim": 8,
        "alpha": 1.0, "beta": 2.0, "lambda_sced": 0.1, "lambda_kl": 0.1, "seed": 7,
    })


SNAPSHOT_DIR = Path(__file__).parent / "snapshots"


@pytest.fixture
def pinned():
    """Compare named float values with tests/snapshots/<name>.json within 1e-12.

    The first run of a reference test writes its snapshot and skips; later runs
    must reproduce it.
    """
    def check(name, values):
        path = SNAPSHOT_DIR / f"{name}.json"
        if not path.exists():
            SNAPSHOT_DIR.mkdir(exist_ok=True)
            path.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
            pytest.skip(f"pinned new snapshot {path.name}")
        expected = json.loads(path.read_text())
        assert sorted(values) == sorted(expected)
        for key, value in expected.items():
            assert values[key] == pytest.approx(value, rel=1e-12, abs=1e-12), key

    return check
