# regularizers/divergence.py
"""
Divergence-from-uniform regularizers on the predictive distribution.

    kl_uniform(P) = sum_t sum_v P log(P/U)
    sced(P)       = sum_t sum_v |P log(P/U)|^alpha * (1 - P)^beta

Both are plain sums over steps and vocabulary; any per-sequence or per-batch
normalization belongs to the caller.
"""

import math
from typing import Optional

import numpy as np

from coordinator.config import ABS_DIV_FLOOR, PROB_FLOOR
from coordinator.state_schema import ScedParams, UniformPrior
from utils.distributions import ArrayLike, uniform_prior_for
from utils.validator import require_valid


def pointwise_divergence(p: np.ndarray, log_u: float) -> np.ndarray:
    """d = P * (log P - log U), entry by entry"""
    return p * (np.log(p) - log_u)


def abs_power(d: np.ndarray, exponent: float) -> np.ndarray:
    """|d|^exponent through exp(exponent * log|d|); exponent 1 and 0 are exact"""
    a = np.abs(d)
    if exponent == 1.0:
        return a
    if exponent == 0.0:
        return np.ones_like(a)
    return np.exp(exponent * np.log(np.maximum(a, ABS_DIV_FLOOR)))


def sparsity_weight(p: np.ndarray, beta: float) -> Optional[np.ndarray]:
    """(1 - P)^beta, or None when beta == 0 (weight identically one)"""
    if beta == 0.0:
        return None
    return np.power(1.0 - p, beta)


def kl_terms(p: np.ndarray, log_u: float) -> float:
    return float(np.sum(pointwise_divergence(p, log_u)))


def sced_terms(p: np.ndarray, params: ScedParams, log_u: float) -> float:
    powered = abs_power(pointwise_divergence(p, log_u), params.alpha)
    weight = sparsity_weight(p, params.beta)
    if weight is None:
        return float(np.sum(powered))
    return float(np.sum(powered * weight))


def kl_uniform(p: ArrayLike, u: Optional[UniformPrior] = None) -> float:
    """KL from the uniform prior summed over all steps"""
    probs = require_valid(p, floor=PROB_FLOOR)
    u = uniform_prior_for(probs, u)
    return kl_terms(probs, u.log_value)


def sced(p: ArrayLike, params: ScedParams, u: Optional[UniformPrior] = None) -> float:
    """Sparsity-calibrated entropic divergence, summed exactly as written.

    Entries below the uniform level contribute +|d| (the absolute value is
    kept), so at alpha=1, beta=0 the result is >= kl_uniform, with equality
    only for uniform rows.
    """
    probs = require_valid(p, floor=PROB_FLOOR)
    u = uniform_prior_for(probs, u)
    return sced_terms(probs, params, u.log_value)


def one_hot_row(vocab_size: int, hot: int, floor: float = PROB_FLOOR) -> np.ndarray:
    """Floor-valid near one-hot row: hot entry exactly 1, the rest at the floor"""
    if not 0 <= hot < vocab_size:
        raise IndexError(f"hot index {hot} outside [0, {vocab_size})")
    row = np.full(vocab_size, floor, dtype=np.float64)
    row[hot] = 1.0
    return row


def one_hot_residue_bound(vocab_size: int, alpha: float, floor: float = PROB_FLOOR) -> float:
    """Upper bound on sced of a one_hot_row at beta > 0: only cold tokens contribute"""
    return vocab_size * floor * abs(math.log(floor * vocab_size)) ** alpha
