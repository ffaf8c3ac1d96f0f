# objective/caref.py
"""
Composite training objective:

    L = CE + lambda_sced * SCED + lambda_kl * KL(P || U)

The loss is a pure function of the logits; P = softmax(logits) is computed
once per call and shared by the regularizer terms.
"""

from typing import Optional

import numpy as np

from coordinator.state_schema import (
    CarefWeights,
    LossBreakdown,
    ObjectiveKind,
    ScedParams,
    TrainConfig,
    UniformPrior,
)
from regularizers.baselines import entropy_penalty, label_smoothing_ce
from regularizers.divergence import kl_terms, sced_terms
from utils.distributions import (
    ArrayLike,
    as_logit_seq,
    log_softmax,
    negative_log_likelihood,
    softmax,
    uniform_prior_for,
)
from utils.validator import check_targets

_NO_WEIGHTS = CarefWeights()


def cross_entropy(logits: ArrayLike, targets: ArrayLike) -> float:
    """-sum_t log softmax(z_t)[y_t]"""
    z = as_logit_seq(logits)
    y = check_targets(targets, z.shape[0], z.shape[1])
    return negative_log_likelihood(log_softmax(z), y)


def caref_loss(logits: ArrayLike, targets: ArrayLike, params: ScedParams, weights: CarefWeights,
               u: Optional[UniformPrior] = None) -> LossBreakdown:
    z = as_logit_seq(logits)
    y = check_targets(targets, z.shape[0], z.shape[1])
    u = uniform_prior_for(z, u)
    p = softmax(z)
    ce = negative_log_likelihood(log_softmax(z), y)
    return LossBreakdown.compose(
        ce=ce,
        sced=sced_terms(p, params, u.log_value),
        kl=kl_terms(p, u.log_value),
        weights=weights,
    )


def objective_loss(logits: ArrayLike, targets: ArrayLike, cfg: TrainConfig) -> LossBreakdown:
    """Loss for the objective selected in cfg.

    Comparison objectives still report sced and kl as diagnostics but give
    them zero weight; their own weighted term goes into `penalty`.
    """
    if cfg.objective is ObjectiveKind.CAREF:
        return caref_loss(logits, targets, cfg.sced, cfg.weights)

    z = as_logit_seq(logits)
    y = check_targets(targets, z.shape[0], z.shape[1])
    u = uniform_prior_for(z)
    p = softmax(z)
    ce = negative_log_likelihood(log_softmax(z), y)
    if cfg.objective is ObjectiveKind.ENTROPY_PENALTY:
        penalty = cfg.lambda_entropy * entropy_penalty(p)
    else:
        penalty = label_smoothing_ce(z, y, cfg.smoothing_eps, u) - ce
    return LossBreakdown.compose(
        ce=ce,
        sced=sced_terms(p, cfg.sced, u.log_value),
        kl=kl_terms(p, u.log_value),
        weights=_NO_WEIGHTS,
        penalty=penalty,
    )


def batch_loss(logits: np.ndarray, targets: np.ndarray, cfg: TrainConfig) -> LossBreakdown:
    """Mean over independent single-step sequences (one logit row each).

    Every term is a sum over rows, so the batch sum is one call on the stacked
    rows; dividing by the number of sequences gives the per-sequence mean.
    """
    total = objective_loss(logits, targets, cfg)
    n = float(logits.shape[0])
    return LossBreakdown(**{k: v / n for k, v in total.model_dump().items()})
