"""From-scratch classifiers and evaluation machinery."""

from .ann import AnnConfig
from .knn import KnnConfig, minkowski
from .metrics import EvalReport, evaluate_predictions
from .model_io import (
    TrainedModel,
    ann_train,
    dt_train,
    knn_train,
    load_model,
    predict,
    save_model,
    svm_train,
    train_model,
)
from .preprocess import Scaler, split
from .selection import default_grids, grid_search, select_best
from .svm import SvmConfig
from .tree import DtConfig, gini

__all__ = [
    "AnnConfig", "DtConfig", "KnnConfig", "SvmConfig",
    "EvalReport", "Scaler", "TrainedModel",
    "ann_train", "dt_train", "knn_train", "svm_train", "train_model",
    "default_grids", "evaluate_predictions", "gini", "grid_search",
    "load_model", "minkowski", "predict", "save_model", "select_best", "split",
]
