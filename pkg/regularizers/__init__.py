"""
Regularizers on the predictive distribution

- divergence.py: SCED and KL to the uniform prior
- baselines.py: entropy penalty, label smoothing, sparsemax
- compare.py: regime classification and the comparison table
  (import it directly; it depends on the objective package)
"""

from .divergence import kl_uniform, sced, one_hot_row, one_hot_residue_bound
from .baselines import (
    entropy_penalty,
    entropy_penalty_grad_wrt_probs,
    label_smoothing_ce,
    sparsemax,
    sparsemax_rows,
)

__all__ = [
    "kl_uniform",
    "sced",
    "one_hot_row",
    "one_hot_residue_bound",
    "entropy_penalty",
    "entropy_penalty_grad_wrt_probs",
    "label_smoothing_ce",
    "sparsemax",
    "sparsemax_rows",
]
