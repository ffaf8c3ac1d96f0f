# toy/optimizer.py
"""
AdamW with decoupled weight decay, a linear warmup / linear decay schedule and
global gradient-norm clipping, written directly from the update equations.
"""

import math
from typing import Dict, Tuple

import numpy as np

from coordinator.state_schema import TrainConfig


def lr_at(step: int, base_lr: float, warmup_steps: int, total_steps: int) -> float:
    """Learning rate for 1-indexed optimizer step `step`.

    Rises as base_lr * step / warmup up to the warmup boundary, then falls
    linearly to exactly 0 at total_steps.
    """
    if warmup_steps > 0 and step <= warmup_steps:
        return base_lr * step / warmup_steps
    remaining = total_steps - warmup_steps
    if remaining <= 0:
        return 0.0
    return base_lr * max(total_steps - step, 0) / remaining


def global_norm(grads: Dict[str, np.ndarray]) -> float:
    return math.sqrt(math.fsum(float(np.sum(g * g)) for g in grads.values()))


def clip_global_norm(grads: Dict[str, np.ndarray], max_norm: float) -> Tuple[Dict[str, np.ndarray], float]:
    """Scale all gradients together so their joint L2 norm is at most max_norm.

    Returns the (possibly) rescaled gradients and the norm before clipping.
    """
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads, norm
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}, norm


class AdamW:
    def __init__(self, params: Dict[str, np.ndarray], cfg: TrainConfig):
        self.beta1 = cfg.adam_beta1
        self.beta2 = cfg.adam_beta2
        self.eps = cfg.adam_eps
        self.weight_decay = cfg.weight_decay
        self.m = {name: np.zeros_like(p) for name, p in params.items()}
        self.v = {name: np.zeros_like(p) for name, p in params.items()}
        self.t = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], lr: float) -> None:
        """Update params in place"""
        self.t += 1
        bias1 = 1.0 - self.beta1 ** self.t
        bias2 = 1.0 - self.beta2 ** self.t
        for name, p in params.items():
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            if lr == 0.0:
                continue
            # decoupled decay acts on the parameters, not the gradient
            if self.weight_decay != 0.0:
                p -= lr * self.weight_decay * p
            m_hat = self.m[name] / bias1
            v_hat = self.v[name] / bias2
            p -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
