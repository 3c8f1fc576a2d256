"""K-nearest-neighbors classifier under the Minkowski distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError

_CHUNK_ELEMS = 30_000_000  # cap on the (rows x train x dim) temporary


@dataclass(frozen=True)
class KnnConfig:
    k: int = 3
    p: float = 2.0

    def __post_init__(self):
        if self.k < 1:
            raise TrainingError("k must be at least 1")
        if self.p < 1:
            raise TrainingError("Minkowski order p must be at least 1")


@dataclass
class KnnParams:
    x: np.ndarray                # standardized training features
    yc: np.ndarray               # compact class ids
    k: int
    p: float


def minkowski(x, y, p) -> float:
    """(sum |x_i - y_i|^p)^(1/p); p >= 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if p < 1:
        raise ValueError("Minkowski order p must be at least 1")
    return float(np.sum(np.abs(x - y) ** p) ** (1.0 / p))


def distance_matrix(queries: np.ndarray, train: np.ndarray, p: float) -> np.ndarray:
    """All pairwise Minkowski distances.

    p=2 goes through the inner-product expansion (one matmul); other orders
    use a direct chunked |diff|^p sweep.
    """
    nq, dim = queries.shape
    nt = train.shape[0]
    if p == 2:
        sq = np.sum(queries * queries, axis=1)
        st = np.sum(train * train, axis=1)
        d2 = sq[:, None] + st[None, :] - 2.0 * (queries @ train.T)
        np.maximum(d2, 0.0, out=d2)
        return np.sqrt(d2)
    rows = max(1, _CHUNK_ELEMS // max(1, nt * dim))
    out = np.empty((nq, nt))
    for lo in range(0, nq, rows):
        hi = min(lo + rows, nq)
        diff = np.abs(queries[lo:hi, None, :] - train[None, :, :])
        if p == 1:
            out[lo:hi] = diff.sum(axis=2)
        else:
            out[lo:hi] = np.sum(diff**p, axis=2) ** (1.0 / p)
    return out


def knn_fit(xs, yc, config: KnnConfig) -> KnnParams:
    if config.k > len(xs):
        raise TrainingError(f"k={config.k} exceeds training size {len(xs)}")
    return KnnParams(x=xs, yc=yc, k=config.k, p=config.p)


def vote(labels, dists, k_labels_max: int):
    """Majority vote with deterministic ties: smaller summed distance wins,
    then the lowest class id."""
    counts = np.bincount(labels, minlength=k_labels_max)
    best = np.flatnonzero(counts == counts.max())
    if len(best) > 1:
        sums = np.array([dists[labels == c].sum() for c in best])
        best = best[sums == sums.min()]
    return int(best[0])


def knn_predict_compact(params: KnnParams, xs, dmat: np.ndarray | None = None) -> np.ndarray:
    """Predict compact class ids; neighbor order is (distance, train index)."""
    if dmat is None:
        dmat = distance_matrix(xs, params.x, params.p)
    n_train = params.x.shape[0]
    n_classes = int(params.yc.max()) + 1
    arange = np.arange(n_train)
    out = np.empty(len(xs), dtype=int)
    for i in range(len(xs)):
        order = np.lexsort((arange, dmat[i]))[: params.k]
        out[i] = vote(params.yc[order], dmat[i][order], n_classes)
    return out
