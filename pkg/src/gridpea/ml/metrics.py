"""Evaluation metrics: accuracy, macro precision/recall/F1, confusion matrix.

Macro averages run over the classes present in the validation truth; a class
that receives no predictions counts precision 0. Both F1 conventions are
computed; the mean of per-class F1 values is the reported one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EvalReport:
    accuracy: float              # percent
    macro_precision: float
    macro_recall: float
    macro_f1: float              # mean of per-class F1
    f1_of_macros: float          # harmonic mean of macro precision/recall
    classes: tuple[int, ...]
    confusion: np.ndarray        # (n_classes, n_classes), true x predicted
    per_class: dict[int, dict[str, float]]

    def to_json_obj(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "f1_of_macros": self.f1_of_macros,
            "classes": list(self.classes),
            "confusion": self.confusion.tolist(),
            "per_class": {str(k): v for k, v in self.per_class.items()},
        }


def evaluate_predictions(y_true, y_pred) -> EvalReport:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) == 0:
        raise ValueError("cannot evaluate an empty validation set")
    if y_true.shape != y_pred.shape:
        raise ValueError("truth and prediction lengths differ")

    classes = np.unique(np.concatenate([y_true, y_pred]))
    index = {int(c): i for i, c in enumerate(classes)}
    m = len(classes)
    cm = np.zeros((m, m), dtype=int)
    for t, p in zip(y_true, y_pred):
        cm[index[int(t)], index[int(p)]] += 1

    accuracy = 100.0 * np.trace(cm) / cm.sum()

    per_class = {}
    precs, recs, f1s = [], [], []
    for c in classes:
        i = index[int(c)]
        col, row = cm[:, i].sum(), cm[i, :].sum()
        prec = cm[i, i] / col if col > 0 else 0.0
        rec = cm[i, i] / row if row > 0 else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
        per_class[int(c)] = {
            "precision": 100.0 * prec,
            "recall": 100.0 * rec,
            "f1": 100.0 * f1,
            "support": int(row),
        }
        if row > 0:  # macro averages skip classes absent from the truth
            precs.append(prec)
            recs.append(rec)
            f1s.append(f1)

    mp, mr = float(np.mean(precs)), float(np.mean(recs))
    f1_of_macros = 2 * mp * mr / (mp + mr) if mp + mr > 0 else 0.0
    return EvalReport(
        accuracy=float(accuracy),
        macro_precision=100.0 * mp,
        macro_recall=100.0 * mr,
        macro_f1=100.0 * float(np.mean(f1s)),
        f1_of_macros=100.0 * f1_of_macros,
        classes=tuple(int(c) for c in classes),
        confusion=cm,
        per_class=per_class,
    )
