import math

import numpy as np
import pytest

from coordinator.config import CONFIGS_DIR, TOY_PRESET
from coordinator.state_schema import LossBreakdown, SynthTaskConfig, TrainConfig
from toy import trainer
from toy.model import ToyModel, init_model
from toy.optimizer import lr_at
from toy.synth_task import SynthSplit, generate
from toy.trainer import evaluate, steps_per_epoch, train
from utils.config_parser import load_train_config
from utils.errors import ArgumentError, TrainingDivergedError


def test_steps_per_epoch():
    assert steps_per_epoch(48, 8) == 6
    assert steps_per_epoch(49, 8) == 7


class TestEvaluate:
    def test_lookup_table_model_is_perfect(self):
        task = SynthTaskConfig(vocab_size=6, context_len=3, relevant_set_size=3, num_eval=50, seed=2)
        data = generate(task)
        out_proj = np.zeros((6, 6))
        out_proj[np.arange(6), data.mechanism.permutation] = 1.0
        model = ToyModel(embed=np.eye(6), out_proj=out_proj)
        metrics = evaluate(model, data.eval)
        assert metrics.accuracy == 1.0
        assert metrics.n_items == 50

    def test_uniform_model_is_at_chance(self):
        task = SynthTaskConfig()
        model = ToyModel(embed=np.zeros((16, 4)), out_proj=np.zeros((4, 16)))
        metrics = evaluate(model, generate(task).eval)
        p, n = 1 / 16, task.num_eval
        assert abs(metrics.accuracy - p) <= 4 * math.sqrt(p * (1 - p) / n)
        assert metrics.mean_effective_support == pytest.approx(16.0)
        assert metrics.mean_kl_uniform == pytest.approx(0.0, abs=1e-12)

    def test_empty_split(self):
        model = ToyModel(embed=np.zeros((4, 2)), out_proj=np.zeros((2, 4)))
        empty = SynthSplit(contexts=np.zeros((0, 3), dtype=np.int64), targets=np.zeros(0, dtype=np.int64))
        with pytest.raises(ArgumentError):
            evaluate(model, empty)


class TestTrain:
    def test_history_shape(self, small_task, quick_cfg):
        _, history = train(small_task, quick_cfg)
        assert [r.epoch for r in history.records] == [1, 2, 3]
        assert len(history.lr_trace) == 18
        assert history.lr_trace[0] == pytest.approx(quick_cfg.lr / 4)
        assert history.lr_trace[-1] == 0.0
        assert history.lr_trace == [lr_at(s, quick_cfg.lr, quick_cfg.warmup_steps, 18) for s in range(1, 19)]
        assert all(g <= quick_cfg.max_grad_norm + 1e-9 for g in history.grad_norm_trace)
        assert all(post <= pre + 1e-12 for pre, post in zip(history.pre_clip_norm_trace, history.grad_norm_trace))

    def test_reproducible(self, small_task, quick_cfg):
        model_a, history_a = train(small_task, quick_cfg)
        model_b, history_b = train(small_task, quick_cfg)
        np.testing.assert_array_equal(model_a.embed, model_b.embed)
        np.testing.assert_array_equal(model_a.out_proj, model_b.out_proj)
        assert history_a == history_b

    def test_zero_lr_keeps_initial_parameters(self, small_task, quick_cfg):
        cfg = quick_cfg.model_copy(update={"lr": 0.0})
        model, history = train(small_task, cfg)
        initial = init_model(small_task.vocab_size, cfg.embed_dim, cfg.init_scale, np.random.default_rng(cfg.seed))
        np.testing.assert_array_equal(model.embed, initial.embed)
        np.testing.assert_array_equal(model.out_proj, initial.out_proj)
        first = history.records[0]
        assert all(r.model_dump(exclude={"epoch"}) == first.model_dump(exclude={"epoch"}) for r in history.records)
        assert set(history.lr_trace) == {0.0}

    def test_comparison_objective_trains(self, small_task, quick_cfg):
        cfg = TrainConfig(**{**quick_cfg.model_dump(), "objective": "entropy_penalty"})
        _, history = train(small_task, cfg)
        assert history.final.penalty < 0.0

    def test_non_finite_loss_is_divergence(self, small_task, quick_cfg, monkeypatch):
        def exploding(model, contexts, targets, cfg):
            grads = {"embed": np.zeros_like(model.embed), "out_proj": np.zeros_like(model.out_proj)}
            return grads, LossBreakdown(ce=float("nan"), sced=0.0, kl=0.0, total=float("nan"))

        monkeypatch.setattr(trainer, "backward_batch", exploding)
        with pytest.raises(TrainingDivergedError) as exc:
            train(small_task, quick_cfg)
        assert exc.value.step == 1
        assert "step 1" in str(exc.value)

    @pytest.mark.slow
    def test_toy_preset_learns_noiseless_task(self):
        cfg = TrainConfig.from_flat({**TOY_PRESET, "lambda_sced": 0.0, "lambda_kl": 0.0})
        _, history = train(SynthTaskConfig(), cfg)
        assert history.final.accuracy >= 0.95

    @pytest.mark.slow
    def test_reference_seed_evaluation_is_pinned(self, pinned):
        task, cfg = load_train_config(CONFIGS_DIR / "toy.conf")
        model, _ = train(task, cfg)
        metrics = evaluate(model, generate(task).eval)
        pinned("toy_reference_evaluate", metrics.model_dump(exclude={"topk"}))
