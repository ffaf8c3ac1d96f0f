"""Strategies and direct-summation oracles shared by the test modules"""

import math

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays


def logit_rows(max_steps: int = 4, min_vocab: int = 2, max_vocab: int = 8, bound: float = 10.0):
    """Strategy for finite T x |V| logit matrices"""
    return st.tuples(st.integers(1, max_steps), st.integers(min_vocab, max_vocab)).flatmap(
        lambda shape: arrays(np.float64, shape, elements=st.floats(-bound, bound, allow_nan=False)))


def fsum_kl(row, vocab_size):
    return math.fsum(p * math.log(p * vocab_size) for p in row if p > 0.0)


def fsum_sced(row, vocab_size, alpha, beta):
    total = []
    for p in row:
        d = p * (math.log(p) - math.log(1.0 / vocab_size))
        total.append(abs(d) ** alpha * (1.0 - p) ** beta)
    return math.fsum(total)


def log_softmax_row(z, target):
    m = max(z)
    return z[target] - m - math.log(math.fsum(math.exp(v - m) for v in z))
