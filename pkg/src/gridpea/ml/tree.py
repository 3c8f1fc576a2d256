"""CART decision tree with exact greedy splits.

Every node scans all (feature, midpoint) candidates and takes the split with
the lowest weighted child impurity; ties go to the lowest feature index,
then the lowest threshold. The per-feature sweep is vectorized through an
occurrence-rank trick so no n x n_classes cumulative table is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError

FEATURE_CHUNK = 256


def gini(counts) -> float:
    """Impurity 1 - sum(p_j^2) of a class-count vector."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini is undefined for an empty count vector")
    if np.any(counts < 0):
        raise ValueError("class counts must be non-negative")
    p = counts / total
    return float(1.0 - np.sum(p * p))


@dataclass(frozen=True)
class DtConfig:
    max_depth: int = 32
    min_samples_split: int = 2
    min_impurity_decrease: float = 0.0

    def __post_init__(self):
        if self.max_depth < 1:
            raise TrainingError("max_depth must be at least 1")
        if self.min_samples_split < 2:
            raise TrainingError("min_samples_split must be at least 2")
        if self.min_impurity_decrease < 0:
            raise TrainingError("min_impurity_decrease must be non-negative")


@dataclass
class DtParams:
    """Flattened tree: node i is a leaf iff feature[i] < 0."""

    feature: np.ndarray          # int, -1 for leaves
    threshold: np.ndarray        # float
    left: np.ndarray             # int child ids, -1 for leaves
    right: np.ndarray
    counts: np.ndarray           # (n_nodes, n_classes) class counts at the node

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0)


def _best_split_node(x, yc, tot):
    """Best (score, feature, threshold) over all candidates at one node.

    score = sum_left(counts^2)/n_left + sum_right(counts^2)/n_right, to be
    maximized; equals n - weighted child gini.
    """
    n, n_feat = x.shape
    rows = np.arange(n)[:, None]
    best = (-np.inf, -1, 0.0)
    for lo in range(0, n_feat, FEATURE_CHUNK):
        cols = slice(lo, min(lo + FEATURE_CHUNK, n_feat))
        xs = x[:, cols]
        order = np.argsort(xs, axis=0, kind="stable")
        xs_s = np.take_along_axis(xs, order, axis=0)
        ys_s = yc[order]

        # occurrence rank of each label within its class, in sorted order
        ord2 = np.argsort(ys_s, axis=0, kind="stable")
        cls_s = np.take_along_axis(ys_s, ord2, axis=0)
        newblk = np.empty(cls_s.shape, dtype=bool)
        newblk[0] = True
        newblk[1:] = cls_s[1:] != cls_s[:-1]
        blockstart = np.where(newblk, rows, 0)
        np.maximum.accumulate(blockstart, axis=0, out=blockstart)
        rank = rows - blockstart
        occ = np.empty_like(rank)
        np.put_along_axis(occ, ord2, rank, axis=0)

        sumsq_l = np.cumsum(2 * occ + 1, axis=0).astype(float)
        occ_rev = tot[ys_s] - 1 - occ
        contrib = (2 * occ_rev + 1).astype(float)
        sumsq_r = np.flip(np.cumsum(np.flip(contrib, 0), axis=0), 0)

        nl = rows[: n - 1] + 1.0
        nr = n - nl
        score = sumsq_l[:-1] / nl + sumsq_r[1:] / nr
        score[xs_s[1:] <= xs_s[:-1]] = -np.inf

        for c in range(score.shape[1]):
            pos = int(np.argmax(score[:, c]))
            sc = score[pos, c]
            if sc > best[0]:
                thr = 0.5 * (xs_s[pos, c] + xs_s[pos + 1, c])
                best = (float(sc), lo + c, float(thr))
    return best


def dt_fit(x, yc, n_classes, config: DtConfig) -> DtParams:
    """Grow the tree on compacted labels yc in 0..n_classes-1."""
    n = len(yc)
    if n == 0:
        raise TrainingError("empty training set")

    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(cnt):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(cnt)
        return len(feature) - 1

    def build(idx, depth):
        cnt = np.bincount(yc[idx], minlength=n_classes)
        node = new_node(cnt)
        n_node = len(idx)
        g_parent = gini(cnt)
        if (
            depth >= config.max_depth
            or n_node < config.min_samples_split
            or g_parent == 0.0
        ):
            return node
        score, feat, thr = _best_split_node(x[idx], yc[idx], cnt)
        if feat < 0:
            return node
        decrease = g_parent - (n_node - score) / n_node
        if decrease <= 0 or decrease < config.min_impurity_decrease:
            return node
        mask = x[idx, feat] <= thr
        feature[node] = feat
        threshold[node] = thr
        left[node] = build(idx[mask], depth + 1)
        right[node] = build(idx[~mask], depth + 1)
        return node

    build(np.arange(n), 0)
    return DtParams(
        feature=np.array(feature, dtype=int),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=int),
        right=np.array(right, dtype=int),
        counts=np.vstack(counts).astype(int),
    )


def dt_predict_compact(params: DtParams, x) -> np.ndarray:
    """Predicted compact class ids; leaf ties resolve to the lowest class id."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty(len(x), dtype=int)
    for i, row in enumerate(x):
        node = 0
        while params.feature[node] >= 0:
            node = params.left[node] if row[params.feature[node]] <= params.threshold[node] else params.right[node]
        out[i] = int(np.argmax(params.counts[node]))
    return out
