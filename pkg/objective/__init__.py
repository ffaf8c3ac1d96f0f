"""
Training objective, its analytic gradients and the finite-difference audit
"""

from .caref import batch_loss, caref_loss, cross_entropy, objective_loss
from .gradients import (
    caref_grad_wrt_logits,
    kl_grad_wrt_probs,
    objective_grad_wrt_logits,
    sced_grad_wrt_probs,
)
from .gradcheck import caref_loss_extended, finite_diff_check, run_gradient_audit

__all__ = [
    "batch_loss",
    "caref_loss",
    "cross_entropy",
    "objective_loss",
    "caref_grad_wrt_logits",
    "kl_grad_wrt_probs",
    "objective_grad_wrt_logits",
    "sced_grad_wrt_probs",
    "caref_loss_extended",
    "finite_diff_check",
    "run_gradient_audit",
]
