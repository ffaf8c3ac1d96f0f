import numpy as np
import pytest
from pydantic import ValidationError

from coordinator.state_schema import SynthTaskConfig
from toy.synth_task import (
    bayes_accuracy,
    export_dataset,
    generate,
    mechanism,
    posterior_predict,
    signal_posterior,
)


def test_same_seed_same_data(small_task):
    a, b = generate(small_task), generate(small_task)
    np.testing.assert_array_equal(a.train.contexts, b.train.contexts)
    np.testing.assert_array_equal(a.eval.targets, b.eval.targets)
    np.testing.assert_array_equal(a.mechanism.permutation, b.mechanism.permutation)


def test_other_seed_other_mechanism(small_task):
    other = small_task.model_copy(update={"seed": small_task.seed + 1})
    assert not np.array_equal(generate(small_task).train.contexts, generate(other).train.contexts)


def test_eval_split_does_not_depend_on_train_size(small_task):
    bigger = small_task.model_copy(update={"num_train": 500})
    np.testing.assert_array_equal(generate(small_task).eval.contexts, generate(bigger).eval.contexts)


def test_noiseless_examples_follow_mechanism(small_task):
    data = generate(small_task)
    mech = data.mechanism
    assert mech.relevant_positions.tolist() == sorted(mech.relevant_positions.tolist())
    assert sorted(mech.permutation.tolist()) == list(range(small_task.vocab_size))
    for context, target in data.train:
        signal = context[mech.relevant_positions]
        assert np.all(signal == signal[0])
        assert mech.permutation[signal[0]] == target
    assert data.train.contexts.shape == (48, 6)
    assert len(data.eval) == 32


def test_noiseless_posterior_is_exact(small_task):
    data = generate(small_task)
    for context, target in data.eval:
        post = signal_posterior(small_task, context, data.mechanism)
        assert post.max() == 1.0
        assert posterior_predict(small_task, context, data.mechanism) == target
    assert bayes_accuracy(small_task, data.eval) == 1.0


def test_full_relevant_context_is_a_lookup_table():
    cfg = SynthTaskConfig(vocab_size=6, context_len=3, relevant_set_size=3, num_train=20, num_eval=20, seed=9)
    data = generate(cfg)
    table = {}
    for context, target in data.train:
        assert table.setdefault(tuple(context), target) == target


def test_noise_makes_some_labels_unrecoverable():
    cfg = SynthTaskConfig(vocab_size=8, context_len=6, relevant_set_size=3, distractor_noise=0.5,
                          num_train=8, num_eval=2000, seed=1)
    data = generate(cfg)
    acc = bayes_accuracy(cfg, data.eval)
    assert 1.0 / cfg.vocab_size < acc < 1.0


def test_noisy_posterior_favours_repeated_token():
    cfg = SynthTaskConfig(vocab_size=4, context_len=3, relevant_set_size=3, distractor_noise=0.3, seed=0)
    post = signal_posterior(cfg, np.array([2, 2, 1]), mechanism(cfg))
    assert post.sum() == pytest.approx(1.0)
    assert int(np.argmax(post)) == 2
    assert post[1] > post[0] == pytest.approx(post[3])


def test_relevant_set_must_fit():
    with pytest.raises(ValidationError):
        SynthTaskConfig(context_len=3, relevant_set_size=4)
    with pytest.raises(ValidationError):
        SynthTaskConfig(vocab_size=3, context_len=8, relevant_set_size=4)


def test_export_format(small_task, tmp_path):
    split = generate(small_task).train
    path = export_dataset(split, tmp_path / "nested" / "train.tsv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").split("\n")
    assert lines[-1] == ""
    assert len(lines) - 1 == len(split)
    context, target = lines[0].split("\t")
    assert [int(t) for t in context.split(" ")] == split.contexts[0].tolist()
    assert int(target) == split.targets[0]
