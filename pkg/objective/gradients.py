# objective/gradients.py
"""
Analytic gradients of the objective terms.

With d = P log(P/U) and L = log(P/U), the SCED derivative per entry is

    dS/dP = alpha |d|^(alpha-1) sign(d) (L + 1) (1-P)^beta
            - beta |d|^alpha (1-P)^(beta-1)

Conventions: sign(0) = 0 (subgradient 0 at the alpha = 1 kink), the second
term vanishes when beta = 0, and (1 - P) is floored before the beta - 1 power
when 0 < beta < 1.
"""

from typing import Optional

import numpy as np

from coordinator.config import ONE_MINUS_P_FLOOR, PROB_FLOOR, UNIFORM_SNAP_TOLERANCE
from coordinator.state_schema import CarefWeights, ObjectiveKind, ScedParams, TrainConfig, UniformPrior
from regularizers.baselines import smoothed_targets
from regularizers.divergence import abs_power
from utils.distributions import ArrayLike, as_logit_seq, softmax, uniform_prior_for
from utils.validator import check_targets, require_valid


# === Gradients with respect to probabilities ===

def sced_grad_terms(p: np.ndarray, params: ScedParams, log_u: float) -> np.ndarray:
    alpha, beta = params.alpha, params.beta
    log_ratio = np.log(p) - log_u
    d = p * log_ratio
    one_minus = 1.0 - p

    sign = np.where(np.abs(log_ratio) <= UNIFORM_SNAP_TOLERANCE, 0.0, np.sign(d))
    first = sign * (log_ratio + 1.0)
    if alpha != 1.0:
        first = alpha * abs_power(d, alpha - 1.0) * first
    if beta == 0.0:
        return first

    first = first * np.power(one_minus, beta)
    base = np.maximum(one_minus, ONE_MINUS_P_FLOOR) if beta < 1.0 else one_minus
    second = beta * abs_power(d, alpha) * np.power(base, beta - 1.0)
    return first - second


def kl_grad_terms(p: np.ndarray, log_u: float) -> np.ndarray:
    return np.log(p) - log_u + 1.0


def sced_grad_wrt_probs(p: ArrayLike, params: ScedParams, u: Optional[UniformPrior] = None) -> np.ndarray:
    probs = require_valid(p, floor=PROB_FLOOR)
    u = uniform_prior_for(probs, u)
    return sced_grad_terms(probs, params, u.log_value)


def kl_grad_wrt_probs(p: ArrayLike, u: Optional[UniformPrior] = None) -> np.ndarray:
    """log(P/U) + 1 per entry"""
    probs = require_valid(p, floor=PROB_FLOOR)
    u = uniform_prior_for(probs, u)
    return kl_grad_terms(probs, u.log_value)


# === Chaining through softmax ===

def softmax_vjp(p: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Apply the softmax Jacobian row by row: out_u = sum_v g_v P_v (delta_uv - P_u)"""
    return p * (g - np.sum(g * p, axis=1, keepdims=True))


def _ce_grad(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    grad = p.copy()
    grad[np.arange(p.shape[0]), y] -= 1.0
    return grad


def caref_grad_wrt_logits(logits: ArrayLike, targets: ArrayLike, params: ScedParams, weights: CarefWeights,
                          u: Optional[UniformPrior] = None) -> np.ndarray:
    """d(CE + lambda_sced*SCED + lambda_kl*KL)/dz; every row sums to zero"""
    z = as_logit_seq(logits)
    y = check_targets(targets, z.shape[0], z.shape[1])
    u = uniform_prior_for(z, u)
    p = softmax(z)
    grad = _ce_grad(p, y)
    if weights.lambda_sced == 0.0 and weights.lambda_kl == 0.0:
        return grad

    g = np.zeros_like(p)
    if weights.lambda_sced != 0.0:
        g += weights.lambda_sced * sced_grad_terms(p, params, u.log_value)
    if weights.lambda_kl != 0.0:
        g += weights.lambda_kl * kl_grad_terms(p, u.log_value)
    return grad + softmax_vjp(p, g)


def entropy_penalty_grad_wrt_logits(logits: ArrayLike) -> np.ndarray:
    """Gradient of -sum_t H(softmax(z_t)); descending it raises entropy"""
    z = as_logit_seq(logits)
    p = softmax(z)
    return softmax_vjp(p, np.log(p) + 1.0)


def label_smoothing_grad_wrt_logits(logits: ArrayLike, targets: ArrayLike, eps: float) -> np.ndarray:
    z = as_logit_seq(logits)
    y = check_targets(targets, z.shape[0], z.shape[1])
    return softmax(z) - smoothed_targets(y, z.shape[1], eps)


def objective_grad_wrt_logits(logits: ArrayLike, targets: ArrayLike, cfg: TrainConfig) -> np.ndarray:
    """Gradient matching objective.caref.objective_loss for the configured objective"""
    if cfg.objective is ObjectiveKind.CAREF:
        return caref_grad_wrt_logits(logits, targets, cfg.sced, cfg.weights)
    if cfg.objective is ObjectiveKind.ENTROPY_PENALTY:
        z = as_logit_seq(logits)
        y = check_targets(targets, z.shape[0], z.shape[1])
        p = softmax(z)
        return _ce_grad(p, y) + softmax_vjp(p, cfg.lambda_entropy * (np.log(p) + 1.0))
    return label_smoothing_grad_wrt_logits(logits, targets, cfg.smoothing_eps)
