import numpy as np
import pytest

from gridpea.errors import SmoConvergenceError, TrainingError
from gridpea.ml import SvmConfig, predict, svm_train

from oracles import kkt_report


def blobs(rng, centers, n_per, spread=0.5):
    xs, ys = [], []
    for ci, c in enumerate(centers):
        xs.append(rng.normal(0, spread, size=(n_per, len(c))) + np.asarray(c))
        ys.append(np.full(n_per, ci))
    return np.vstack(xs), np.concatenate(ys)


def machine_dicts(model):
    """Adapt a trained model's machines for the test-side KKT checker."""
    out = []
    for m in model.params.machines:
        out.append({
            "class_pos": int(model.classes[m.class_pos]),
            "class_neg": int(model.classes[m.class_neg]),
            "sv_rows": m.sv_idx,
            "coef": m.coef,
            "b": m.b,
        })
    return out


def test_separable_blobs_train_accuracy_and_kkt():
    rng = np.random.default_rng(0)
    x, y = blobs(rng, [(0, 0), (6, 6)], 40)
    cfg = SvmConfig(C=10.0, gamma=0.5, tol=1e-3)
    model = svm_train(x, y, cfg, schema_hash="h", check_ascent=True)
    assert np.all(predict(model, x, "h") == y)
    assert model.train_meta["max_kkt_violation"] <= cfg.tol

    xs = model.scaler.transform(x)
    for m in machine_dicts(model):
        assert kkt_report(m, xs, y, cfg.gamma, cfg.C) <= cfg.tol + 1e-9


def test_sum_alpha_y_is_zero():
    rng = np.random.default_rng(3)
    x, y = blobs(rng, [(0, 0), (4, 0), (0, 4)], 25)
    model = svm_train(x, y, SvmConfig(C=5.0, gamma=0.3), schema_hash="h")
    for m in model.params.machines:
        assert abs(np.sum(m.coef)) <= 1e-12  # coef = alpha * y


def test_xor_pattern():
    rng = np.random.default_rng(7)
    pts, labs = [], []
    for cx, cy, lab in ((0, 0, 0), (1, 1, 0), (0, 1, 1), (1, 0, 1)):
        pts.append(rng.normal(0, 0.08, size=(25, 2)) + [cx, cy])
        labs.append(np.full(25, lab))
    x, y = np.vstack(pts), np.concatenate(labs)
    model = svm_train(x, y, SvmConfig(C=10.0, gamma=1.0), schema_hash="h")
    assert np.mean(predict(model, x, "h") == y) == 1.0


def test_multiclass_only_present_pairs():
    rng = np.random.default_rng(1)
    x, y = blobs(rng, [(0, 0), (5, 0), (0, 5), (5, 5)], 12)
    y = y * 3  # labels 0, 3, 6, 9
    model = svm_train(x, y, SvmConfig(gamma=0.4), schema_hash="h")
    assert len(model.params.machines) == 6  # C(4,2)
    assert np.all(np.isin(predict(model, x, "h"), [0, 3, 6, 9]))


def test_single_class_rejected():
    x = np.zeros((5, 2))
    with pytest.raises(TrainingError):
        svm_train(x, np.zeros(5, dtype=int), SvmConfig())


def test_nonconvergence_raises_with_violation():
    # a pass budget of 1 cannot satisfy the KKT conditions on real data
    rng = np.random.default_rng(5)
    x, y = blobs(rng, [(0, 0), (0.5, 0.5)], 30, spread=1.0)
    with pytest.raises(SmoConvergenceError) as exc:
        svm_train(x, y, SvmConfig(C=1.0, gamma=1.0, tol=1e-6, max_passes=1), schema_hash="h")
    assert exc.value.kkt_violation > 1e-6


def test_ascent_check_passes_on_small_problems():
    rng = np.random.default_rng(11)
    for seed in range(3):
        x, y = blobs(np.random.default_rng(seed), [(0, 0), (3, 3)], 15)
        svm_train(x, y, SvmConfig(C=2.0, gamma=0.7), schema_hash="h", check_ascent=True)


def test_config_validation():
    with pytest.raises(TrainingError):
        SvmConfig(C=0)
    with pytest.raises(TrainingError):
        SvmConfig(gamma=-1)
