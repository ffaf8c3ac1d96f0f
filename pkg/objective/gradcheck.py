# objective/gradcheck.py
"""
Finite-difference audit of the analytic gradients.

Each coordinate is perturbed by +/- h and the central difference
(f(z + h e) - f(z - h e)) / 2h is compared with the analytic value using the
relative error |a - n| / max(|a|, |n|, 1e-8).

At h = 1e-5 a float64 loss loses about eps * |f| / h to cancellation, which is
above 1e-6 relative on small gradient entries. The audit therefore differences
caref_loss_extended, the same loss evaluated in np.longdouble.
"""

import logging
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from coordinator.config import GRADCHECK_DENOM_FLOOR, GRADCHECK_STEP_RANGE, KINK_TOLERANCE, PROB_FLOOR
from coordinator.state_schema import (
    CarefWeights,
    GradcheckConfig,
    GradReport,
    LossBreakdown,
    ScedParams,
)
from objective.gradients import caref_grad_wrt_logits
from regularizers.divergence import abs_power, pointwise_divergence, sparsity_weight
from utils.distributions import ArrayLike, as_logit_seq, softmax, uniform_prior_for
from utils.errors import ArgumentError
from utils.validator import check_targets

logger = logging.getLogger(__name__)

LossEvaluator = Callable[..., Union[float, np.floating, LossBreakdown]]
GradEvaluator = Callable[..., np.ndarray]


def _scalar(value: Union[float, np.floating, LossBreakdown]) -> Union[float, np.floating]:
    # extended-precision values pass through uncast
    return value.total if isinstance(value, LossBreakdown) else value


def caref_loss_extended(logits: ArrayLike, targets: ArrayLike, params: ScedParams,
                        weights: CarefWeights) -> np.longdouble:
    """caref_loss total in np.longdouble: floored softmax, CE on the floored row, SCED and KL"""
    z = np.asarray(logits, dtype=np.longdouble)
    if z.ndim == 1:
        z = z[np.newaxis, :]
    y = check_targets(targets, z.shape[0], z.shape[1])
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=1, keepdims=True)
    p = np.maximum(p, np.longdouble(PROB_FLOOR))
    p = p / p.sum(axis=1, keepdims=True)

    log_u = -np.log(np.longdouble(z.shape[1]))
    ce = -np.sum(np.log(p[np.arange(z.shape[0]), y]))
    d = pointwise_divergence(p, log_u)
    powered = abs_power(d, params.alpha)
    weight = sparsity_weight(p, params.beta)
    sced = np.sum(powered if weight is None else powered * weight)
    kl = np.sum(d)
    return ce + np.longdouble(weights.lambda_sced) * sced + np.longdouble(weights.lambda_kl) * kl


def central_differences(f: Callable[[np.ndarray], float], z: np.ndarray, h: float,
                        dtype: type = np.float64) -> np.ndarray:
    """Central differences of f at z; perturbation and subtraction happen in dtype"""
    numeric = np.zeros(z.shape, dtype=np.float64)
    work = np.array(z, dtype=dtype)
    step = dtype(h)
    for idx in np.ndindex(*z.shape):
        original = work[idx]
        work[idx] = original + step
        f_plus = f(work)
        work[idx] = original - step
        f_minus = f(work)
        work[idx] = original
        numeric[idx] = (f_plus - f_minus) / (2 * step)
    return numeric


def kink_mask(logits: ArrayLike, params: ScedParams) -> np.ndarray:
    """Coordinates within KINK_TOLERANCE of the |d| = 0 kink of |d|^alpha at alpha = 1.

    A whole step is excluded when any of its entries has |d| < KINK_TOLERANCE,
    since perturbing one logit moves every probability in that step.
    """
    z = as_logit_seq(logits)
    mask = np.zeros(z.shape, dtype=bool)
    if params.alpha != 1.0:
        return mask
    p = softmax(z)
    d = pointwise_divergence(p, uniform_prior_for(p).log_value)
    near = np.min(np.abs(d), axis=1) < KINK_TOLERANCE
    mask[near, :] = True
    return mask


def finite_diff_check(loss_fn: LossEvaluator, logits: ArrayLike, targets: ArrayLike,
                      params: ScedParams, weights: CarefWeights, h: float = 1e-5,
                      grad_fn: Optional[GradEvaluator] = None,
                      exclude: Optional[np.ndarray] = None, separable: bool = True,
                      dtype: type = np.float64) -> GradReport:
    """Compare grad_fn (default caref_grad_wrt_logits) with central differences of loss_fn.

    loss_fn and grad_fn are called as fn(logits, targets, params, weights).
    With separable=True the loss must be a sum of independent per-step terms
    and is differenced one step at a time. dtype is the precision the logits
    are perturbed in; pass np.longdouble together with caref_loss_extended.
    Step sizes outside [1e-7, 1e-3] are allowed but logged; coarse steps are
    how a truncation-dominated audit is demonstrated.
    """
    if not np.isfinite(h) or h <= 0.0:
        raise ArgumentError(f"finite-difference step must be positive, got {h}")
    lo, hi = GRADCHECK_STEP_RANGE
    if not lo <= h <= hi:
        logger.warning(f"finite-difference step {h:g} outside recommended range [{lo:g}, {hi:g}]")

    z = as_logit_seq(logits)
    grad_fn = grad_fn or caref_grad_wrt_logits
    analytic = np.asarray(grad_fn(z, targets, params, weights), dtype=np.float64)
    if separable:
        # the loss is a sum over steps, so each row's derivative only needs that row's term;
        # smaller loss magnitudes mean less cancellation in f(z+h) - f(z-h)
        y = np.asarray(targets)
        numeric = np.vstack([
            central_differences(lambda zz, t=t: _scalar(loss_fn(zz, y[t:t + 1], params, weights)),
                                z[t:t + 1], h, dtype)
            for t in range(z.shape[0])
        ])
    else:
        numeric = central_differences(lambda zz: _scalar(loss_fn(zz, targets, params, weights)), z, h, dtype)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), GRADCHECK_DENOM_FLOOR)
    rel = np.abs(analytic - numeric) / denom
    n_excluded = 0
    if exclude is not None and exclude.any():
        n_excluded = int(exclude.sum())
        rel = np.where(exclude, 0.0, rel)

    worst = np.unravel_index(int(np.argmax(rel)), rel.shape)
    return GradReport(
        max_rel_error=float(rel[worst]),
        worst_coordinate=(int(worst[0]), int(worst[1])),
        step_size=h,
        n_checked=int(rel.size - n_excluded),
        n_excluded=n_excluded,
    )


def random_instance(rng: np.random.Generator, max_steps: int, max_vocab: int) -> Tuple[np.ndarray, np.ndarray]:
    steps = int(rng.integers(1, max_steps + 1))
    vocab = int(rng.integers(2, max_vocab + 1))
    logits = rng.normal(0.0, 1.5, size=(steps, vocab))
    targets = rng.integers(0, vocab, size=steps)
    return logits, targets


class AuditResult:
    """Worst report per (alpha, beta) grid point plus the largest row-sum defect"""

    def __init__(self, threshold: float):
        self.threshold = threshold
        self.reports: List[Tuple[ScedParams, GradReport]] = []
        self.max_row_sum = 0.0

    @property
    def worst(self) -> Tuple[ScedParams, GradReport]:
        return max(self.reports, key=lambda item: item[1].max_rel_error)

    @property
    def passed(self) -> bool:
        return bool(self.reports) and self.worst[1].max_rel_error < self.threshold and self.max_row_sum <= 1e-9


def run_gradient_audit(cfg: GradcheckConfig) -> AuditResult:
    """Audit caref_grad_wrt_logits over cfg's (alpha, beta) grid on random instances"""
    if np.finfo(np.longdouble).eps >= np.finfo(np.float64).eps:
        logger.warning("np.longdouble is plain float64 on this platform; small gradient entries may "
                       "fail a 1e-6 threshold through cancellation alone")
    rng = np.random.default_rng(cfg.seed)
    instances = [random_instance(rng, cfg.max_steps, cfg.max_vocab) for _ in range(cfg.instances)]
    weights = CarefWeights(lambda_sced=cfg.lambda_sced, lambda_kl=cfg.lambda_kl)
    result = AuditResult(cfg.threshold)

    for alpha in cfg.alphas:
        for beta in cfg.betas:
            params = ScedParams(alpha=alpha, beta=beta)
            worst: Optional[GradReport] = None
            for logits, targets in instances:
                grad = caref_grad_wrt_logits(logits, targets, params, weights)
                result.max_row_sum = max(result.max_row_sum, float(np.max(np.abs(grad.sum(axis=1)))))
                report = finite_diff_check(caref_loss_extended, logits, targets, params, weights, h=cfg.step,
                                           exclude=kink_mask(logits, params), dtype=np.longdouble)
                if worst is None or report.max_rel_error > worst.max_rel_error:
                    worst = report
            logger.debug(f"alpha={alpha} beta={beta}: max rel error {worst.max_rel_error:.3e} "
                         f"at {worst.worst_coordinate}")
            result.reports.append((params, worst))

    params, report = result.worst
    logger.info(f"gradient audit: worst {report.max_rel_error:.3e} at alpha={params.alpha} beta={params.beta}, "
                f"threshold {cfg.threshold:g}, {'PASS' if result.passed else 'FAIL'}")
    return result
