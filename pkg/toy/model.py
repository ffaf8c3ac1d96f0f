# toy/model.py
"""
Bag-of-embeddings next-token predictor with hand-derived gradients.

    h      = mean_i embed[context_i]      (D,)
    logits = h @ out_proj                 (|V|,)

The loss gradient with respect to the logits comes from the objective
package; this module only chains it through the two parameter matrices.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from coordinator.state_schema import CarefWeights, LossBreakdown, ScedParams, TrainConfig
from objective.caref import batch_loss, caref_loss
from objective.gradients import caref_grad_wrt_logits, objective_grad_wrt_logits
from utils.errors import ArgumentError, DimensionError, InputValidationError, TargetIndexError

PARAM_NAMES = ("embed", "out_proj")


@dataclass
class ToyModel:
    embed: np.ndarray     # |V| x D
    out_proj: np.ndarray  # D x |V|

    def __post_init__(self):
        if self.embed.ndim != 2 or self.out_proj.ndim != 2:
            raise DimensionError("embed and out_proj must be matrices")
        if self.embed.shape[1] != self.out_proj.shape[0] or self.embed.shape[0] != self.out_proj.shape[1]:
            raise DimensionError(f"embed {self.embed.shape} and out_proj {self.out_proj.shape} do not chain")
        if not (np.all(np.isfinite(self.embed)) and np.all(np.isfinite(self.out_proj))):
            raise InputValidationError("model parameters must be finite")

    @property
    def vocab_size(self) -> int:
        return int(self.embed.shape[0])

    @property
    def dim(self) -> int:
        return int(self.embed.shape[1])

    def params(self) -> Dict[str, np.ndarray]:
        return {"embed": self.embed, "out_proj": self.out_proj}

    def copy(self) -> "ToyModel":
        return ToyModel(embed=self.embed.copy(), out_proj=self.out_proj.copy())


def init_model(vocab_size: int, dim: int, scale: float, rng: np.random.Generator) -> ToyModel:
    return ToyModel(
        embed=rng.normal(0.0, scale, size=(vocab_size, dim)),
        out_proj=rng.normal(0.0, scale, size=(dim, vocab_size)),
    )


def zeros_like_model(model: ToyModel) -> Dict[str, np.ndarray]:
    return {name: np.zeros_like(value) for name, value in model.params().items()}


def _contexts(model: ToyModel, contexts: np.ndarray) -> np.ndarray:
    ids = np.asarray(contexts)
    if ids.ndim == 1:
        ids = ids[np.newaxis, :]
    if ids.ndim != 2 or ids.shape[1] < 1:
        raise ArgumentError(f"contexts must be N x C token ids with C >= 1, got shape {ids.shape}")
    bad = (ids < 0) | (ids >= model.vocab_size)
    if bad.any():
        n, i = np.argwhere(bad)[0]
        raise TargetIndexError(f"context token {int(ids[n, i])} at ({n}, {i}) outside [0, {model.vocab_size})")
    return ids.astype(np.int64)


def mean_features(model: ToyModel, contexts: np.ndarray) -> np.ndarray:
    ids = _contexts(model, contexts)
    return model.embed[ids].mean(axis=1)


def forward(model: ToyModel, context: np.ndarray) -> np.ndarray:
    """Logit row for one context"""
    return forward_batch(model, np.asarray(context)[np.newaxis, :])[0]


def forward_batch(model: ToyModel, contexts: np.ndarray) -> np.ndarray:
    return mean_features(model, contexts) @ model.out_proj


def chain_logit_grad(model: ToyModel, contexts: np.ndarray, dlogits: np.ndarray) -> Dict[str, np.ndarray]:
    """Push dL/dlogits (N x |V|) back to the parameters"""
    ids = _contexts(model, contexts)
    h = model.embed[ids].mean(axis=1)
    d_out = h.T @ dlogits
    dh = dlogits @ model.out_proj.T / ids.shape[1]
    d_embed = np.zeros_like(model.embed)
    # np.add.at accumulates repeated token ids in a fixed order
    for i in range(ids.shape[1]):
        np.add.at(d_embed, ids[:, i], dh)
    return {"embed": d_embed, "out_proj": d_out}


def backward(model: ToyModel, context: np.ndarray, target: int, params: ScedParams,
             weights: CarefWeights) -> Tuple[Dict[str, np.ndarray], LossBreakdown]:
    """Parameter gradients of the CAREF loss for a single (context, target) example"""
    ids = np.asarray(context)[np.newaxis, :]
    logits = forward_batch(model, ids)
    y = np.array([target])
    loss = caref_loss(logits, y, params, weights)
    dlogits = caref_grad_wrt_logits(logits, y, params, weights)
    return chain_logit_grad(model, ids, dlogits), loss


def backward_batch(model: ToyModel, contexts: np.ndarray, targets: np.ndarray,
                   cfg: TrainConfig) -> Tuple[Dict[str, np.ndarray], LossBreakdown]:
    """Mean loss over the batch and its parameter gradients"""
    logits = forward_batch(model, contexts)
    loss = batch_loss(logits, targets, cfg)
    dlogits = objective_grad_wrt_logits(logits, targets, cfg) / logits.shape[0]
    return chain_logit_grad(model, contexts, dlogits), loss


# === Snapshot ===

def save_model(model: ToyModel, directory: Union[str, Path]) -> Path:
    """Little-endian float64 dump of embed then out_proj, with a shape sidecar"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "model.bin"
    with path.open("wb") as f:
        for name in PARAM_NAMES:
            f.write(np.ascontiguousarray(model.params()[name], dtype="<f8").tobytes())
    (directory / "model.shape").write_text(f"{model.vocab_size} {model.dim}\n", encoding="utf-8")
    return path


def load_model(directory: Union[str, Path]) -> ToyModel:
    directory = Path(directory)
    vocab_size, dim = (int(x) for x in (directory / "model.shape").read_text(encoding="utf-8").split())
    flat = np.fromfile(directory / "model.bin", dtype="<f8")
    if flat.size != 2 * vocab_size * dim:
        raise DimensionError(f"model.bin holds {flat.size} values, expected {2 * vocab_size * dim}")
    split = vocab_size * dim
    return ToyModel(
        embed=flat[:split].reshape(vocab_size, dim).astype(np.float64),
        out_proj=flat[split:].reshape(dim, vocab_size).astype(np.float64),
    )
