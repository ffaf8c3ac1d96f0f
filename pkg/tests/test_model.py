import numpy as np
import pytest

from coordinator.state_schema import CarefWeights, ScedParams, TrainConfig
from objective.caref import caref_loss
from toy.model import (
    ToyModel,
    backward,
    backward_batch,
    chain_logit_grad,
    forward,
    forward_batch,
    init_model,
    load_model,
    save_model,
)
from utils.errors import DimensionError, InputValidationError, TargetIndexError

PARAMS = ScedParams(alpha=2.0, beta=1.0)
WEIGHTS = CarefWeights(lambda_sced=0.1, lambda_kl=0.1)


@pytest.fixture
def model(rng):
    return init_model(5, 3, 0.5, rng)


def test_forward_is_mean_embedding_times_projection(model):
    context = np.array([0, 3, 3, 1])
    expected = (model.embed[0] + 2 * model.embed[3] + model.embed[1]) / 4 @ model.out_proj
    np.testing.assert_allclose(forward(model, context), expected, rtol=1e-13, atol=1e-15)
    assert forward_batch(model, np.array([context, context])).shape == (2, 5)


def test_backward_matches_central_differences(model):
    context, target = np.array([4, 0, 2, 2]), 1
    grads, loss = backward(model, context, target, PARAMS, WEIGHTS)
    assert loss.total == pytest.approx(
        caref_loss(forward(model, context), [target], PARAMS, WEIGHTS).total, rel=1e-15)

    h = 1e-6
    for name, value in model.params().items():
        numeric = np.zeros_like(value)
        for idx in np.ndindex(*value.shape):
            original = value[idx]
            value[idx] = original + h
            up = caref_loss(forward(model, context), [target], PARAMS, WEIGHTS).total
            value[idx] = original - h
            down = caref_loss(forward(model, context), [target], PARAMS, WEIGHTS).total
            value[idx] = original
            numeric[idx] = (up - down) / (2 * h)
        np.testing.assert_allclose(grads[name], numeric, rtol=1e-5, atol=1e-8)


def test_unused_tokens_get_no_embedding_gradient(model):
    grads, _ = backward(model, np.array([1, 1, 3]), 0, PARAMS, WEIGHTS)
    assert not grads["embed"][[0, 2, 4]].any()


def test_repeated_tokens_accumulate(model):
    dlogits = np.array([[0.1, -0.4, 0.2, 0.05, 0.05]])
    grads = chain_logit_grad(model, np.array([[2, 2, 0]]), dlogits)
    dh = dlogits @ model.out_proj.T / 3
    np.testing.assert_allclose(grads["embed"][2], 2 * dh[0], rtol=1e-14)
    np.testing.assert_allclose(grads["embed"][0], dh[0], rtol=1e-14)


def test_batch_gradient_is_mean_of_examples(model):
    contexts = np.array([[0, 1, 2], [3, 3, 4], [2, 0, 0]])
    targets = np.array([4, 1, 0])
    cfg = TrainConfig(sced=PARAMS, weights=WEIGHTS)
    grads, loss = backward_batch(model, contexts, targets, cfg)
    singles = [backward(model, c, t, PARAMS, WEIGHTS) for c, t in zip(contexts, targets)]
    for name in ("embed", "out_proj"):
        mean = sum(g[name] for g, _ in singles) / 3
        np.testing.assert_allclose(grads[name], mean, rtol=1e-12, atol=1e-15)
    assert loss.total == pytest.approx(sum(l.total for _, l in singles) / 3, rel=1e-13)


def test_out_of_range_context_token(model):
    with pytest.raises(TargetIndexError):
        forward(model, np.array([0, 5]))


def test_shapes_must_chain():
    with pytest.raises(DimensionError):
        ToyModel(embed=np.zeros((4, 3)), out_proj=np.zeros((2, 4)))
    with pytest.raises(InputValidationError):
        ToyModel(embed=np.full((2, 1), np.nan), out_proj=np.zeros((1, 2)))


def test_snapshot_round_trip(model, tmp_path):
    path = save_model(model, tmp_path)
    assert path.stat().st_size == 8 * 2 * 5 * 3
    assert (tmp_path / "model.shape").read_text() == "5 3\n"
    restored = load_model(tmp_path)
    np.testing.assert_array_equal(restored.embed, model.embed)
    np.testing.assert_array_equal(restored.out_proj, model.out_proj)


def test_truncated_snapshot(model, tmp_path):
    save_model(model, tmp_path)
    (tmp_path / "model.shape").write_text("6 3\n")
    with pytest.raises(DimensionError):
        load_model(tmp_path)
