"""Hyperparameter grids and best-model selection."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..errors import TrainingError
from .ann import AnnConfig
from .knn import KnnConfig, distance_matrix, knn_predict_compact
from .metrics import EvalReport, evaluate_predictions
from .model_io import TrainedModel, predict, train_model
from .preprocess import split
from .svm import SvmConfig
from .tree import DtConfig

# fixed tie order for model selection (best first)
SELECT_ORDER = ("ann", "svm", "knn", "dt")
TABLE_ORDER = ("dt", "svm", "knn", "ann")


def default_grids(seed: int = 0) -> dict[str, list]:
    return {
        "dt": [DtConfig(max_depth=md, min_samples_split=ms)
               for md in (8, 16, 32) for ms in (2, 8)],
        "svm": [SvmConfig(C=c, gamma=g) for c in (1.0, 10.0, 100.0)
                for g in (0.01, 0.1, 1.0)],
        "knn": [KnnConfig(k=k, p=p) for k in (1, 3, 5, 7) for p in (1.0, 2.0)],
        "ann": [AnnConfig(hidden_sizes=h, lr=lr, seed=seed)
                for h in ((128, 64), (64, 32)) for lr in (1e-3, 3e-4)],
    }


def _knn_grid_scores(grid, x_tr, y_tr, x_va, y_va, schema_hash):
    """Evaluate every KNN config reusing one distance matrix per p."""
    from .model_io import knn_train

    scores = []
    by_p = {}
    for cfg in grid:
        by_p.setdefault(cfg.p, []).append(cfg)
    results = {}
    for p, cfgs in by_p.items():
        model = knn_train(x_tr, y_tr, config=cfgs[0], schema_hash=schema_hash)
        dmat = distance_matrix(model.scaler.transform(x_va), model.params.x, p)
        for cfg in cfgs:
            params = replace_knn_k(model.params, cfg.k)
            yc = knn_predict_compact(params, model.scaler.transform(x_va), dmat=dmat)
            results[id(cfg)] = evaluate_predictions(y_va, model.classes[yc])
    for cfg in grid:
        scores.append(results[id(cfg)])
    return scores


def replace_knn_k(params, k):
    from .knn import KnnParams

    return KnnParams(x=params.x, yc=params.yc, k=k, p=params.p)


def grid_search(kind: str, x, y, grids=None, seed: int = 0, schema_hash: str = ""):
    """Pick the config with the best inner-validation accuracy.

    Each config trains on a fixed 80/20 split of the given data; ties break
    on macro F1, then on grid order. Returns (best config, score table).
    """
    grid = (grids or default_grids(seed))[kind]
    if not grid:
        raise TrainingError("empty hyperparameter grid")
    tr, va = split(y, train_fraction=0.8, seed=seed, stratified=True)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    x_tr, y_tr, x_va, y_va = x[tr], y[tr], x[va], y[va]

    if kind == "knn":
        reports = _knn_grid_scores(grid, x_tr, y_tr, x_va, y_va, schema_hash)
    else:
        reports = []
        for cfg in grid:
            model = train_model(kind, x_tr, y_tr, config=cfg, schema_hash=schema_hash)
            yhat = predict(model, x_va, schema_hash)
            reports.append(evaluate_predictions(y_va, yhat))

    best_i = 0
    for i in range(1, len(grid)):
        a, b = reports[i], reports[best_i]
        if (a.accuracy, a.macro_f1) > (b.accuracy, b.macro_f1):
            best_i = i
    table = [
        {"config": repr(cfg), "accuracy": r.accuracy, "macro_f1": r.macro_f1}
        for cfg, r in zip(grid, reports)
    ]
    return grid[best_i], table


def select_best(models: dict[str, TrainedModel], x_val, y_val, schema_hash: str):
    """Rank trained models on validation accuracy (ties: macro F1, then the
    fixed order ann > svm > knn > dt) and emit the 4-metric comparison table."""
    reports: dict[str, EvalReport] = {}
    for kind, model in models.items():
        yhat = predict(model, x_val, schema_hash)
        reports[kind] = evaluate_predictions(y_val, yhat)

    def rank_key(kind):
        r = reports[kind]
        return (-r.accuracy, -r.macro_f1, SELECT_ORDER.index(kind))

    best_kind = min(reports, key=rank_key)
    table = [
        {
            "model": kind,
            "accuracy": reports[kind].accuracy,
            "precision": reports[kind].macro_precision,
            "recall": reports[kind].macro_recall,
            "f1": reports[kind].macro_f1,
        }
        for kind in TABLE_ORDER
        if kind in reports
    ]
    return best_kind, models[best_kind], reports, table
