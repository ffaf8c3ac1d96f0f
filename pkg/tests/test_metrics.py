import math

import numpy as np
import pytest

from utils.errors import ArgumentError, InputValidationError
from utils.metrics import effective_support, predict, report, topk_mass


class TestEffectiveSupport:
    def test_one_hot(self):
        assert effective_support([0.0, 1.0, 0.0]) == 1.0

    def test_uniform(self):
        assert effective_support(np.full(8, 0.125)) == pytest.approx(8.0, rel=1e-14)

    def test_two_equal_tokens(self):
        assert effective_support([0.5, 0.5, 0.0, 0.0]) == pytest.approx(2.0, rel=1e-14)

    def test_rejects_several_rows(self):
        with pytest.raises(ArgumentError):
            effective_support([[0.5, 0.5], [0.5, 0.5]])

    def test_rejects_invalid_row(self):
        with pytest.raises(InputValidationError):
            effective_support([0.6, 0.6])


class TestTopkMass:
    def test_sums_largest(self):
        assert topk_mass([0.1, 0.5, 0.15, 0.25], 2) == pytest.approx(0.75)

    def test_full_vocab_is_one(self):
        assert topk_mass([0.1, 0.2, 0.3, 0.4], 4) == pytest.approx(1.0)

    def test_ties(self):
        assert topk_mass([0.25, 0.25, 0.25, 0.25], 1) == 0.25

    @pytest.mark.parametrize("k", [0, 5])
    def test_k_range(self, k):
        with pytest.raises(ArgumentError):
            topk_mass([0.1, 0.2, 0.3, 0.4], k)


def test_predict_breaks_ties_low():
    assert predict([0.4, 0.4, 0.2]) == 0
    assert predict([0.1, 0.2, 0.7]) == 2


class TestReport:
    def test_means(self):
        outputs = [
            (np.array([1.0, 0.0, 0.0, 0.0]), 0, 0),
            (np.full(4, 0.25), 0, 3),
        ]
        r = report(outputs, k=2)
        assert r.accuracy == 0.5
        assert r.n_items == 2
        assert r.mean_entropy == pytest.approx(math.log(4) / 2)
        assert r.mean_effective_support == pytest.approx(2.5)
        assert r.mean_topk_mass == pytest.approx(0.75)
        assert r.mean_kl_uniform == pytest.approx(math.log(4) / 2)

    def test_k_is_capped_at_vocab(self):
        r = report([(np.array([0.5, 0.5]), 1, 1)], k=5)
        assert r.mean_topk_mass == pytest.approx(1.0)
        assert r.accuracy == 1.0

    def test_empty(self):
        with pytest.raises(ArgumentError):
            report([])
