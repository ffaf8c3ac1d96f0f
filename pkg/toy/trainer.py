# toy/trainer.py
"""
Training loop for the toy model.

Single-threaded and seeded end to end: the same (task seed, train seed) pair
reproduces the final parameters and the full history bit for bit.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from coordinator.config import DEFAULT_TOPK
from coordinator.state_schema import EpochRecord, MetricsReport, SynthTaskConfig, TrainConfig, TrainHistory
from objective.caref import batch_loss
from toy.model import ToyModel, backward_batch, forward_batch, init_model
from toy.optimizer import AdamW, clip_global_norm, global_norm, lr_at
from toy.synth_task import SynthDataset, SynthSplit, generate
from utils.distributions import softmax
from utils.errors import ArgumentError, InputValidationError, TrainingDivergedError
from utils.metrics import report

logger = logging.getLogger(__name__)


def evaluate(model: ToyModel, split: SynthSplit, k: int = DEFAULT_TOPK) -> MetricsReport:
    """Accuracy and distribution statistics over every item of split"""
    if len(split) == 0:
        raise ArgumentError("cannot evaluate on an empty dataset")
    logits = forward_batch(model, split.contexts)
    probs = softmax(logits)
    predicted = np.argmax(logits, axis=1)
    return report(zip(probs, predicted.tolist(), split.targets.tolist()), k=k)


def steps_per_epoch(n_items: int, batch_size: int) -> int:
    return math.ceil(n_items / batch_size)


def train(task: SynthTaskConfig, cfg: TrainConfig,
          data: Optional[SynthDataset] = None) -> Tuple[ToyModel, TrainHistory]:
    """Fit a fresh model on the task's train split with cfg's AdamW recipe.

    The per-epoch record holds the objective averaged over the whole train
    split in its stored order, plus eval-split metrics, both taken after the
    epoch's last update.
    """
    data = data or generate(task)
    train_split = data.train
    rng = np.random.default_rng(cfg.seed)
    model = init_model(task.vocab_size, cfg.embed_dim, cfg.init_scale, rng)
    params = model.params()
    optimizer = AdamW(params, cfg)

    n = len(train_split)
    per_epoch = steps_per_epoch(n, cfg.batch_size)
    total_steps = per_epoch * cfg.epochs
    history = TrainHistory()
    step = 0

    logger.info(f"training {cfg.objective.value} objective: {cfg.epochs} epochs x {per_epoch} steps, "
                f"alpha={cfg.sced.alpha} beta={cfg.sced.beta} "
                f"lambda_sced={cfg.weights.lambda_sced} lambda_kl={cfg.weights.lambda_kl}")

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            step += 1
            try:
                grads, loss = backward_batch(model, train_split.contexts[idx], train_split.targets[idx], cfg)
            except InputValidationError as e:
                # parameters already overflowed, so the logits are no longer finite
                raise TrainingDivergedError(step, {"error": str(e)}) from e
            if not loss.is_finite() or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise TrainingDivergedError(step, loss.model_dump())

            grads, pre_norm = clip_global_norm(grads, cfg.max_grad_norm)
            lr = lr_at(step, cfg.lr, cfg.warmup_steps, total_steps)
            optimizer.step(params, grads, lr)

            history.lr_trace.append(lr)
            history.pre_clip_norm_trace.append(pre_norm)
            history.grad_norm_trace.append(global_norm(grads))

        breakdown = batch_loss(forward_batch(model, train_split.contexts), train_split.targets, cfg)
        if not breakdown.is_finite():
            raise TrainingDivergedError(step, breakdown.model_dump())
        metrics = evaluate(model, data.eval)
        record = EpochRecord(epoch=epoch, **breakdown.model_dump(), **metrics.model_dump(exclude={"n_items", "topk"}))
        history.records.append(record)
        logger.info(f"epoch {epoch}/{cfg.epochs}: total={record.total:.4f} ce={record.ce:.4f} "
                    f"sced={record.sced:.4f} kl={record.kl:.4f} acc={record.accuracy:.3f} "
                    f"support={record.mean_effective_support:.2f}")

    return model, history
