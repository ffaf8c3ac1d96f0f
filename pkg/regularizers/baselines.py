# regularizers/baselines.py
"""
Comparison regularizers: entropy penalty, label smoothing and sparsemax.
These reproduce the failure modes SCED is contrasted with and are used by the
comparison audit and the alternative training objectives.
"""

from typing import Optional, Union

import numpy as np

from coordinator.state_schema import SmoothingEps, UniformPrior
from utils.distributions import (
    ArrayLike,
    as_logit_seq,
    entropy,
    log_softmax,
    negative_log_likelihood,
    uniform_prior_for,
)
from utils.errors import InputValidationError
from utils.validator import check_targets, require_valid


# === Entropy penalty ===

def entropy_penalty(p: ArrayLike) -> float:
    """-sum_t H(P_t).

    Sign convention: the value decreases as entropy grows, so adding it with a
    positive weight and descending flattens the distribution.
    """
    probs = require_valid(p)
    return -float(np.sum(entropy(probs)))


def entropy_penalty_grad_wrt_probs(p: ArrayLike) -> np.ndarray:
    """d/dP of sum P log P, i.e. log P + 1 (needs strictly positive P)"""
    probs = require_valid(p)
    if np.any(probs <= 0.0):
        raise InputValidationError("entropy penalty gradient needs strictly positive probabilities")
    return np.log(probs) + 1.0


# === Label smoothing ===

def _epsilon(eps: Union[SmoothingEps, float]) -> float:
    return eps.epsilon if isinstance(eps, SmoothingEps) else SmoothingEps(epsilon=eps).epsilon


def label_smoothing_ce(logits: ArrayLike, targets: ArrayLike, eps: Union[SmoothingEps, float],
                       u: Optional[UniformPrior] = None) -> float:
    """Cross-entropy against (1 - eps) * onehot + eps * U, summed over steps"""
    z = as_logit_seq(logits)
    y = check_targets(targets, z.shape[0], z.shape[1])
    u = uniform_prior_for(z, u)
    e = _epsilon(eps)
    logp = log_softmax(z)
    ce = negative_log_likelihood(logp, y)
    uniform_ce = float(-np.sum(logp)) * u.value
    return (1.0 - e) * ce + e * uniform_ce


def smoothed_targets(targets: np.ndarray, vocab_size: int, eps: float) -> np.ndarray:
    q = np.full((targets.shape[0], vocab_size), eps / vocab_size)
    q[np.arange(targets.shape[0]), targets] += 1.0 - eps
    return q


# === Sparsemax ===

def sparsemax(row: ArrayLike) -> np.ndarray:
    """Euclidean projection of one logit row onto the probability simplex.

    Sort descending, keep the largest k with 1 + k*z_(k) > sum_{j<=k} z_(j),
    threshold at tau = (sum_{j<=k} z_(j) - 1) / k. The output may hold exact zeros.
    """
    z = np.array(row, dtype=np.float64)
    if z.ndim != 1 or z.size < 1:
        raise InputValidationError(f"sparsemax expects a single logit row, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise InputValidationError("sparsemax input contains non-finite logits")
    zs = np.sort(z)[::-1]
    ks = np.arange(1, z.size + 1)
    cumulative = np.cumsum(zs)
    support = ks[1.0 + ks * zs > cumulative]
    k = int(support[-1])
    tau = (cumulative[k - 1] - 1.0) / k
    return np.maximum(z - tau, 0.0)


def sparsemax_rows(logits: ArrayLike) -> np.ndarray:
    z = as_logit_seq(logits)
    return np.vstack([sparsemax(r) for r in z])
