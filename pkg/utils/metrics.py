# utils/metrics.py
"""
Distributional diagnostics for trained models: accuracy plus how concentrated
the predictive distribution is (entropy, effective support, top-k mass, KL to
uniform).
"""

import math
from typing import Iterable, Tuple

import numpy as np

from coordinator.config import DEFAULT_TOPK
from coordinator.state_schema import MetricsReport
from utils.distributions import ArrayLike, entropy
from utils.errors import ArgumentError
from utils.validator import require_valid

Prediction = Tuple[ArrayLike, int, int]


def _row(row: ArrayLike) -> np.ndarray:
    p = require_valid(row)
    if p.shape[0] != 1:
        raise ArgumentError(f"expected a single probability row, got {p.shape[0]} rows")
    return p[0]


def effective_support(row: ArrayLike) -> float:
    """exp(H(row)): 1 for a one-hot row, |V| for the uniform row"""
    p = _row(row)
    return float(np.clip(math.exp(entropy(p)), 1.0, p.size))


def topk_mass(row: ArrayLike, k: int) -> float:
    p = _row(row)
    if not 1 <= k <= p.size:
        raise ArgumentError(f"k must lie in [1, {p.size}], got {k}")
    # stable descending order: equal probabilities keep their index order
    order = np.argsort(-p, kind="stable")
    return float(min(math.fsum(p[order[:k]]), 1.0))


def predict(row: ArrayLike) -> int:
    """argmax with ties to the lowest index"""
    return int(np.argmax(np.asarray(row)))


def report(outputs: Iterable[Prediction], k: int = DEFAULT_TOPK) -> MetricsReport:
    """Aggregate (probability row, predicted id, gold id) triples into arithmetic means.

    k is capped at |V| so small vocabularies still get a top-k figure.
    """
    items = list(outputs)
    if not items:
        raise ArgumentError("metrics report needs at least one prediction")

    correct, entropies, supports, masses, kls = 0, [], [], [], []
    for row, predicted, gold in items:
        p = _row(row)
        h = entropy(p)
        correct += int(predicted == gold)
        entropies.append(h)
        supports.append(float(np.clip(math.exp(h), 1.0, p.size)))
        masses.append(topk_mass(p, min(k, p.size)))
        # KL(P || U) = ln|V| - H(P), exact for rows holding zeros
        kls.append(max(math.log(p.size) - h, 0.0))

    n = len(items)
    return MetricsReport(
        accuracy=correct / n,
        mean_entropy=math.fsum(entropies) / n,
        mean_effective_support=math.fsum(supports) / n,
        mean_topk_mass=math.fsum(masses) / n,
        mean_kl_uniform=math.fsum(kls) / n,
        n_items=n,
        topk=k,
    )
