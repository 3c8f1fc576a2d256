"""Trained-model container, training entry points, and JSON artifacts.

Artifacts are versioned JSON documents with hex-float parameter encoding, so
a loaded model reproduces the original's predictions bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DatasetError, SchemaMismatchError, TrainingError
from .ann import AnnConfig, AnnParams, ann_fit, ann_predict_compact
from .knn import KnnConfig, KnnParams, knn_fit, knn_predict_compact
from .preprocess import Scaler
from .svm import SvmConfig, SvmParams, BinaryMachine, svm_fit, svm_predict_compact
from .tree import DtConfig, DtParams, dt_fit, dt_predict_compact

ARTIFACT_VERSION = "gridpea-model-v1"
MODEL_KINDS = ("dt", "svm", "knn", "ann")


@dataclass
class TrainedModel:
    kind: str
    params: Any
    scaler: Scaler
    classes: np.ndarray          # compact id -> original label
    schema_hash: str
    hyperparameters: dict
    train_meta: dict = field(default_factory=dict)

    @property
    def model_id(self) -> str:
        return f"{self.kind}:{self.schema_hash[:12]}"


def _compact_labels(y):
    classes, yc = np.unique(np.asarray(y, dtype=int), return_inverse=True)
    return classes, yc


def dt_train(x, y, config: DtConfig | None = None, schema_hash: str = "",
             train_meta: dict | None = None) -> TrainedModel:
    config = config or DtConfig()
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise TrainingError("empty training set")
    scaler = Scaler.fit(x)
    classes, yc = _compact_labels(y)
    params = dt_fit(scaler.transform(x), yc, len(classes), config)
    return TrainedModel(
        kind="dt", params=params, scaler=scaler, classes=classes,
        schema_hash=schema_hash,
        hyperparameters={"max_depth": config.max_depth,
                         "min_samples_split": config.min_samples_split,
                         "min_impurity_decrease": config.min_impurity_decrease},
        train_meta=dict(train_meta or {}),
    )


def svm_train(x, y, config: SvmConfig | None = None, schema_hash: str = "",
              check_ascent: bool = False, train_meta: dict | None = None) -> TrainedModel:
    config = config or SvmConfig()
    x = np.asarray(x, dtype=float)
    scaler = Scaler.fit(x)
    classes, yc = _compact_labels(y)
    params = svm_fit(scaler.transform(x), yc, len(classes), config, check_ascent=check_ascent)
    meta = dict(train_meta or {})
    meta["max_kkt_violation"] = max(m.kkt_violation for m in params.machines)
    meta["n_machines"] = len(params.machines)
    return TrainedModel(
        kind="svm", params=params, scaler=scaler, classes=classes,
        schema_hash=schema_hash,
        hyperparameters={"C": config.C, "gamma": config.gamma,
                         "tol": config.tol, "max_passes": config.max_passes},
        train_meta=meta,
    )


def knn_train(x, y, config: KnnConfig | None = None, schema_hash: str = "",
              train_meta: dict | None = None) -> TrainedModel:
    config = config or KnnConfig()
    x = np.asarray(x, dtype=float)
    scaler = Scaler.fit(x)
    classes, yc = _compact_labels(y)
    params = knn_fit(scaler.transform(x), yc, config)
    meta = dict(train_meta or {})
    meta["n_stored"] = len(x)
    return TrainedModel(
        kind="knn", params=params, scaler=scaler, classes=classes,
        schema_hash=schema_hash,
        hyperparameters={"k": config.k, "p": config.p},
        train_meta=meta,
    )


def ann_train(x, y, config: AnnConfig | None = None, schema_hash: str = "",
              train_meta: dict | None = None) -> TrainedModel:
    config = config or AnnConfig()
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise TrainingError("empty training set")
    scaler = Scaler.fit(x)
    classes, yc = _compact_labels(y)
    params, fit_meta = ann_fit(scaler.transform(x), yc, len(classes), config)
    meta = dict(train_meta or {})
    meta.update(fit_meta)
    return TrainedModel(
        kind="ann", params=params, scaler=scaler, classes=classes,
        schema_hash=schema_hash,
        hyperparameters={"hidden_sizes": list(config.hidden_sizes), "lr": config.lr,
                         "batch": config.batch, "epochs": config.epochs,
                         "patience": config.patience, "seed": config.seed},
        train_meta=meta,
    )


TRAINERS = {"dt": dt_train, "svm": svm_train, "knn": knn_train, "ann": ann_train}
CONFIG_TYPES = {"dt": DtConfig, "svm": SvmConfig, "knn": KnnConfig, "ann": AnnConfig}


def train_model(kind: str, x, y, config=None, schema_hash: str = "",
                train_meta: dict | None = None) -> TrainedModel:
    if kind not in TRAINERS:
        raise TrainingError(f"unknown model kind {kind!r}")
    return TRAINERS[kind](x, y, config=config, schema_hash=schema_hash, train_meta=train_meta)


def predict(model: TrainedModel, x, schema_hash: str) -> np.ndarray:
    """Predicted original labels; rejects features from a different schema."""
    if schema_hash != model.schema_hash:
        raise SchemaMismatchError(
            f"feature schema hash {schema_hash[:12]}... does not match the "
            f"model's {model.schema_hash[:12]}..."
        )
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xs = model.scaler.transform(x)
    if model.kind == "dt":
        yc = dt_predict_compact(model.params, xs)
    elif model.kind == "svm":
        yc = svm_predict_compact(model.params, xs)
    elif model.kind == "knn":
        yc = knn_predict_compact(model.params, xs)
    elif model.kind == "ann":
        yc = ann_predict_compact(model.params, xs)
    else:
        raise TrainingError(f"unknown model kind {model.kind!r}")
    return model.classes[yc]


def _enc_arr(a: np.ndarray) -> dict:
    a = np.asarray(a)
    if a.dtype.kind == "f":
        return {"shape": list(a.shape), "dtype": "float64",
                "hex": [float(v).hex() for v in a.ravel()]}
    return {"shape": list(a.shape), "dtype": "int64",
            "data": [int(v) for v in a.ravel()]}


def _dec_arr(obj: dict) -> np.ndarray:
    shape = tuple(obj["shape"])
    if obj["dtype"] == "float64":
        return np.array([float.fromhex(h) for h in obj["hex"]], dtype=float).reshape(shape)
    return np.array(obj["data"], dtype=int).reshape(shape)


def _params_to_obj(model: TrainedModel) -> dict:
    p = model.params
    if model.kind == "dt":
        return {"feature": _enc_arr(p.feature), "threshold": _enc_arr(p.threshold),
                "left": _enc_arr(p.left), "right": _enc_arr(p.right),
                "counts": _enc_arr(p.counts)}
    if model.kind == "svm":
        return {
            "sv": _enc_arr(p.sv),
            "gamma": p.gamma.hex() if isinstance(p.gamma, float) else float(p.gamma).hex(),
            "machines": [
                {"class_pos": m.class_pos, "class_neg": m.class_neg,
                 "sv_idx": _enc_arr(m.sv_idx), "coef": _enc_arr(m.coef),
                 "b": float(m.b).hex(), "kkt_violation": float(m.kkt_violation).hex()}
                for m in p.machines
            ],
        }
    if model.kind == "knn":
        return {"x": _enc_arr(p.x), "yc": _enc_arr(p.yc), "k": p.k, "p": float(p.p).hex()}
    if model.kind == "ann":
        return {"weights": [_enc_arr(w) for w in p.weights],
                "biases": [_enc_arr(b) for b in p.biases]}
    raise TrainingError(f"unknown model kind {model.kind!r}")


def _params_from_obj(kind: str, obj: dict):
    if kind == "dt":
        return DtParams(feature=_dec_arr(obj["feature"]), threshold=_dec_arr(obj["threshold"]),
                        left=_dec_arr(obj["left"]), right=_dec_arr(obj["right"]),
                        counts=_dec_arr(obj["counts"]))
    if kind == "svm":
        machines = [
            BinaryMachine(class_pos=m["class_pos"], class_neg=m["class_neg"],
                          sv_idx=_dec_arr(m["sv_idx"]), coef=_dec_arr(m["coef"]),
                          b=float.fromhex(m["b"]),
                          kkt_violation=float.fromhex(m["kkt_violation"]))
            for m in obj["machines"]
        ]
        return SvmParams(sv=_dec_arr(obj["sv"]), machines=machines,
                         gamma=float.fromhex(obj["gamma"]))
    if kind == "knn":
        return KnnParams(x=_dec_arr(obj["x"]), yc=_dec_arr(obj["yc"]),
                         k=int(obj["k"]), p=float.fromhex(obj["p"]))
    if kind == "ann":
        return AnnParams(weights=[_dec_arr(w) for w in obj["weights"]],
                         biases=[_dec_arr(b) for b in obj["biases"]])
    raise DatasetError(f"unknown model kind {kind!r}")


def save_model(model: TrainedModel, path) -> None:
    doc = {
        "version": ARTIFACT_VERSION,
        "kind": model.kind,
        "schema_hash": model.schema_hash,
        "hyperparameters": model.hyperparameters,
        "train_meta": model.train_meta,
        "classes": [int(c) for c in model.classes],
        "scaler": {"mean": _enc_arr(model.scaler.mean), "std": _enc_arr(model.scaler.std)},
        "parameters": _params_to_obj(model),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise DatasetError(f"model artifact is not valid JSON: {e}") from e
    if doc.get("version") != ARTIFACT_VERSION:
        raise DatasetError(f"unsupported model artifact version {doc.get('version')!r}")
    kind = doc["kind"]
    if kind not in MODEL_KINDS:
        raise DatasetError(f"unknown model kind {kind!r}")
    scaler = Scaler(mean=_dec_arr(doc["scaler"]["mean"]), std=_dec_arr(doc["scaler"]["std"]))
    return TrainedModel(
        kind=kind,
        params=_params_from_obj(kind, doc["parameters"]),
        scaler=scaler,
        classes=np.array(doc["classes"], dtype=int),
        schema_hash=doc["schema_hash"],
        hyperparameters=doc["hyperparameters"],
        train_meta=doc["train_meta"],
    )
