# utils/distributions.py
"""
Probability-distribution and logit primitives.

Rows are decoding steps, columns are vocabulary entries. All arithmetic is
float64 and every function is pure: inputs are never modified.
"""

import math
from typing import Union

import numpy as np

from coordinator.config import PROB_FLOOR
from coordinator.state_schema import UniformPrior
from utils.errors import DimensionError, InputValidationError
from utils.validator import ArrayLike, require_valid


def as_logit_seq(logits: ArrayLike) -> np.ndarray:
    """Coerce to a T x |V| float64 matrix of finite logits (1-D input becomes one row)"""
    z = np.array(logits, dtype=np.float64)
    if z.ndim == 1:
        z = z[np.newaxis, :]
    if z.ndim != 2 or z.shape[0] < 1 or z.shape[1] < 2:
        raise InputValidationError(f"logits must be T x |V| with T >= 1 and |V| >= 2, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        t, v = np.argwhere(~np.isfinite(z))[0]
        raise InputValidationError(f"non-finite logit at step {t}, token {v}: {z[t, v]}")
    return z


def as_prob_seq(probs: ArrayLike) -> np.ndarray:
    p = np.array(probs, dtype=np.float64)
    if p.ndim == 1:
        p = p[np.newaxis, :]
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 2:
        raise InputValidationError(f"probabilities must be T x |V|, got shape {p.shape}")
    return p


def uniform_prior_for(p: np.ndarray, u: UniformPrior = None) -> UniformPrior:
    """Return u (checked against p's vocabulary) or a fresh prior sized to p"""
    if u is None:
        return UniformPrior.of(p.shape[-1])
    if u.size != p.shape[-1]:
        raise DimensionError(f"uniform prior has |V|={u.size} but input has {p.shape[-1]} columns")
    return u


def softmax(logits: ArrayLike, floor: float = PROB_FLOOR) -> np.ndarray:
    """Row-wise softmax with max-shift, then clamp to `floor` and renormalize"""
    z = as_logit_seq(logits)
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=1, keepdims=True)
    if floor > 0.0:
        p = np.maximum(p, floor)
        p = p / p.sum(axis=1, keepdims=True)
    return p


def log_softmax(logits: ArrayLike, floor: float = PROB_FLOOR) -> np.ndarray:
    """Row-wise log of softmax(logits, floor), via shifted log-sum-exp (never log(softmax)).

    The floor is applied in log space: entries are clamped to log(floor) and
    the row is renormalized by the log of its clamped sum. floor=0 gives the
    plain log-probabilities.
    """
    z = as_logit_seq(logits)
    shifted = z - z.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    if floor > 0.0:
        logp = np.maximum(logp, math.log(floor))
        logp = logp - np.log(np.exp(logp).sum(axis=1, keepdims=True))
    return logp


def entropy(p: ArrayLike) -> Union[float, np.ndarray]:
    """Shannon entropy in nats with 0*log 0 := 0.

    A 1-D row gives a float; a T x |V| matrix gives one value per row.
    Rows must pass validation; results are clipped into [0, ln|V|] to absorb
    rounding.
    """
    single = np.ndim(p) == 1
    rows = require_valid(p)
    safe = np.where(rows > 0.0, rows, 1.0)
    h = -np.sum(np.where(rows > 0.0, rows * np.log(safe), 0.0), axis=1)
    h = np.clip(h, 0.0, math.log(rows.shape[1]))
    return float(h[0]) if single else h


def negative_log_likelihood(log_probs: np.ndarray, targets: np.ndarray) -> float:
    """-sum_t log P_t[y_t] for already-checked targets"""
    return float(-np.sum(log_probs[np.arange(log_probs.shape[0]), targets]))
