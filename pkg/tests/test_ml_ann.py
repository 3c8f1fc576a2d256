import numpy as np
import pytest

from gridpea.errors import TrainingError
from gridpea.ml import AnnConfig, ann_train, predict
from gridpea.ml.ann import (
    ann_predict_compact,
    cross_entropy,
    forward,
    gradients,
    init_params,
    softmax,
)

from oracles import finite_difference_grads


def test_softmax_normalization():
    rng = np.random.default_rng(0)
    logits = rng.normal(scale=20, size=(40, 7))
    p = softmax(logits)
    assert np.max(np.abs(p.sum(axis=1) - 1.0)) <= 1e-12
    assert np.all(p >= 0)


def test_single_sample_memorization():
    x = np.array([[0.3, -1.2, 0.7]])
    y = np.array([1])
    cfg = AnnConfig(hidden_sizes=(8,), lr=1e-2, batch=1, epochs=500, patience=500, seed=0)
    model = ann_train(x, y, cfg, schema_hash="h")
    xs = model.scaler.transform(x)
    classes, yc = np.unique(y, return_inverse=True)
    # single-class problem collapses to one logit; check the loss instead
    assert cross_entropy(model.params, xs, yc) < 1e-3


def test_two_blob_training():
    rng = np.random.default_rng(2)
    x = np.vstack([rng.normal(0, 0.3, (30, 4)), rng.normal(3, 0.3, (30, 4))])
    y = np.array([0] * 30 + [1] * 30)
    model = ann_train(x, y, AnnConfig(hidden_sizes=(16,), epochs=60, seed=1), schema_hash="h")
    assert np.mean(predict(model, x, "h") == y) == 1.0


def test_gradient_check_against_finite_differences():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(10, 6))
    y = rng.integers(0, 3, size=10)
    params = init_params(6, (5, 4), 3, rng)
    gw, gb = gradients(params, x, y)
    fw, fb = finite_difference_grads(lambda: cross_entropy(params, x, y), params)
    worst = 0.0
    for a, b in zip(gw + gb, fw + fb):
        denom = np.maximum(np.abs(a) + np.abs(b), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    assert worst <= 1e-4


def test_early_stopping_meta_invariant():
    rng = np.random.default_rng(9)
    x = np.vstack([rng.normal(0, 1, (60, 5)), rng.normal(2, 1, (60, 5))])
    y = np.array([0] * 60 + [1] * 60)
    model = ann_train(x, y, AnnConfig(hidden_sizes=(8,), epochs=40, patience=5, seed=3),
                      schema_hash="h")
    meta = model.train_meta
    assert meta["best_inner_loss"] <= meta["epoch0_inner_loss"]
    assert meta["best_epoch"] <= meta["epochs_run"] <= 40


def test_determinism():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(50, 4))
    y = rng.integers(0, 3, size=50)
    cfg = AnnConfig(hidden_sizes=(6,), epochs=10, seed=7)
    m1 = ann_train(x, y, cfg, schema_hash="h")
    m2 = ann_train(x, y, cfg, schema_hash="h")
    for w1, w2 in zip(m1.params.weights, m2.params.weights):
        assert np.array_equal(w1, w2)


def test_prediction_tie_breaks_lowest_class():
    params = init_params(2, (3,), 4, np.random.default_rng(0))
    for w in params.weights:
        w[:] = 0.0
    out = ann_predict_compact(params, np.ones((5, 2)))
    assert np.all(out == 0)  # equal logits -> argmax picks the first class


def test_config_validation():
    with pytest.raises(TrainingError):
        AnnConfig(hidden_sizes=())
    with pytest.raises(TrainingError):
        AnnConfig(lr=0)
    with pytest.raises(TrainingError):
        AnnConfig(epochs=0)
