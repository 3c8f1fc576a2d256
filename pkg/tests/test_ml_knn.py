import numpy as np
import pytest

from gridpea.errors import TrainingError
from gridpea.ml import KnnConfig, knn_train, minkowski, predict

from oracles import brute_force_knn_predict


def test_minkowski_values():
    assert minkowski([0, 0], [3, 4], 2) == pytest.approx(5.0)
    assert minkowski([0, 0], [3, 4], 1) == pytest.approx(7.0)
    assert minkowski([1.5, -2, 0.25], [1.5, -2, 0.25], 3) == 0.0
    with pytest.raises(ValueError):
        minkowski([0, 0], [1, 2, 3], 2)
    with pytest.raises(ValueError):
        minkowski([0], [1], 0.5)


def test_k1_returns_own_label():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 8))
    y = rng.integers(0, 5, size=50)
    model = knn_train(x, y, KnnConfig(k=1, p=2), schema_hash="h")
    assert np.all(predict(model, x, "h") == y)


def test_k_equal_train_size_predicts_global_majority():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(20, 3))
    y = np.array([2] * 8 + [0] * 8 + [1] * 4)  # tie between classes 2 and 0
    model = knn_train(x, y, KnnConfig(k=20, p=2), schema_hash="h")
    preds = predict(model, rng.normal(size=(10, 3)), "h")
    # vote ties break on summed distance, never on class id here by chance;
    # with all points used, majority classes tie at 8 votes each
    assert np.all(np.isin(preds, [0, 2]))


def test_model_meta_size():
    x = np.zeros((30, 2))
    x[:, 0] = np.arange(30)
    model = knn_train(x, np.zeros(30, dtype=int), KnnConfig(k=3), schema_hash="h")
    assert model.train_meta["n_stored"] == 30


def test_k_too_large_rejected():
    with pytest.raises(TrainingError):
        knn_train(np.zeros((3, 2)), np.zeros(3, dtype=int), KnnConfig(k=4))
    with pytest.raises(TrainingError):
        KnnConfig(k=0)
    with pytest.raises(TrainingError):
        KnnConfig(p=0.5)


@pytest.mark.parametrize("k,p", [(1, 2.0), (3, 1.0), (5, 2.0), (4, 3.0)])
def test_matches_brute_force_oracle(k, p):
    rng = np.random.default_rng(17)
    x_train = rng.normal(size=(120, 10))
    y_train = rng.integers(0, 6, size=120)
    queries = rng.normal(size=(50, 10))

    model = knn_train(x_train, y_train, KnnConfig(k=k, p=p), schema_hash="h")
    got = predict(model, queries, "h")
    xs_train = model.scaler.transform(x_train)
    xs_q = model.scaler.transform(queries)
    for i in range(len(queries)):
        want = brute_force_knn_predict(xs_train, y_train, xs_q[i], k, p)
        assert got[i] == want


def test_oracle_exactness_200_queries():
    rng = np.random.default_rng(99)
    x_train = rng.normal(size=(300, 12))
    y_train = rng.integers(0, 8, size=300)
    queries = rng.normal(size=(200, 12))
    model = knn_train(x_train, y_train, KnnConfig(k=3, p=2), schema_hash="h")
    got = predict(model, queries, "h")
    xs_train = model.scaler.transform(x_train)
    xs_q = model.scaler.transform(queries)
    exact = sum(
        got[i] == brute_force_knn_predict(xs_train, y_train, xs_q[i], 3, 2)
        for i in range(200)
    )
    assert exact == 200
