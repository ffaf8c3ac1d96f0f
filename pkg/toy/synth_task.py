# toy/synth_task.py
"""
Synthetic single-step prediction task with a known decision-relevant subset.

A task seed fixes a permutation of the vocabulary and k relevant context
positions. Every example draws a signal token s, writes it into all k
relevant positions and fills the rest with uniform distractors; the target is
permutation[s]. With probability `distractor_noise` each relevant position is
independently overwritten by a uniform token, which makes some labels
unrecoverable from the context.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Tuple, Union

import numpy as np

from coordinator.state_schema import SynthTaskConfig
from utils.errors import ArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaskMechanism:
    permutation: np.ndarray
    relevant_positions: np.ndarray


@dataclass
class SynthSplit:
    contexts: np.ndarray  # N x context_len token ids
    targets: np.ndarray   # N target ids

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    def __iter__(self) -> Iterator[Tuple[np.ndarray, int]]:
        for context, target in zip(self.contexts, self.targets):
            yield context, int(target)


@dataclass
class SynthDataset:
    config: SynthTaskConfig
    mechanism: TaskMechanism
    train: SynthSplit
    eval: SynthSplit


def mechanism(cfg: SynthTaskConfig) -> TaskMechanism:
    """The hidden labelling rule; a pure function of the task seed"""
    rng = np.random.default_rng(cfg.seed)
    permutation = rng.permutation(cfg.vocab_size)
    positions = np.sort(rng.choice(cfg.context_len, size=cfg.relevant_set_size, replace=False))
    return TaskMechanism(permutation=permutation, relevant_positions=positions)


def _sample(rng: np.random.Generator, cfg: SynthTaskConfig, mech: TaskMechanism, n: int) -> SynthSplit:
    signal = rng.integers(0, cfg.vocab_size, size=n)
    contexts = rng.integers(0, cfg.vocab_size, size=(n, cfg.context_len))
    contexts[:, mech.relevant_positions] = signal[:, np.newaxis]
    if cfg.distractor_noise > 0.0:
        swap = rng.random((n, cfg.relevant_set_size)) < cfg.distractor_noise
        replacement = rng.integers(0, cfg.vocab_size, size=(n, cfg.relevant_set_size))
        relevant = contexts[:, mech.relevant_positions]
        contexts[:, mech.relevant_positions] = np.where(swap, replacement, relevant)
    return SynthSplit(contexts=contexts.astype(np.int64), targets=mech.permutation[signal].astype(np.int64))


def generate(cfg: SynthTaskConfig) -> SynthDataset:
    """Deterministic train/eval split for cfg; the same seed gives identical arrays"""
    mech = mechanism(cfg)
    # separate stream so changing num_train does not reshuffle the eval split
    train_rng, eval_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    data = SynthDataset(
        config=cfg,
        mechanism=mech,
        train=_sample(train_rng, cfg, mech, cfg.num_train),
        eval=_sample(eval_rng, cfg, mech, cfg.num_eval),
    )
    logger.debug(f"generated task: |V|={cfg.vocab_size}, relevant positions {mech.relevant_positions.tolist()}")
    return data


# === Posterior oracle ===

def signal_posterior(cfg: SynthTaskConfig, context: np.ndarray, mech: Optional[TaskMechanism] = None) -> np.ndarray:
    """P(s | context) under a uniform prior on s.

    Each relevant position shows s with probability (1 - rho) + rho/|V| and
    any other token with probability rho/|V|; distractor positions carry no
    information.
    """
    mech = mech or mechanism(cfg)
    rho, vocab = cfg.distractor_noise, cfg.vocab_size
    observed = np.asarray(context)[mech.relevant_positions]
    counts = np.bincount(observed, minlength=vocab)
    k = cfg.relevant_set_size
    if rho == 0.0:
        like = (counts == k).astype(np.float64)
        return like / like.sum()
    hit = np.log((1.0 - rho) + rho / vocab)
    miss = np.log(rho / vocab)
    log_like = counts * hit + (k - counts) * miss
    log_like = log_like - np.max(log_like)
    like = np.exp(log_like)
    return like / like.sum()


def posterior_predict(cfg: SynthTaskConfig, context: np.ndarray, mech: Optional[TaskMechanism] = None) -> int:
    """Bayes-optimal target: permutation[argmax_s P(s | context)], ties to the lowest s"""
    mech = mech or mechanism(cfg)
    return int(mech.permutation[int(np.argmax(signal_posterior(cfg, context, mech)))])


def bayes_accuracy(cfg: SynthTaskConfig, split: SynthSplit) -> float:
    if len(split) == 0:
        raise ArgumentError("bayes accuracy needs a nonempty split")
    mech = mechanism(cfg)
    hits = sum(posterior_predict(cfg, context, mech) == target for context, target in split)
    return hits / len(split)


# === Snapshot ===

def export_dataset(split: SynthSplit, path: Union[str, Path]) -> Path:
    """One record per line: space-separated context ids, a tab, the target id"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for context, target in split:
            f.write(" ".join(str(int(t)) for t in context) + f"\t{target}\n")
    logger.info(f"wrote {len(split)} records to {path}")
    return path
