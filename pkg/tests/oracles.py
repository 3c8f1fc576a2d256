"""Independent reference implementations used to check the package's paths.

Everything here is deliberately written the slow, obvious way: brute-force
scans, per-pair distance loops, finite differences, and explicit KKT
condition checks. None of it shares algorithmic structure with the code
under test.
"""

import numpy as np


def brute_force_best_split(x, y):
    """Exhaustive CART split search over all (feature, midpoint) pairs.

    Returns (decrease, feature, threshold) with the package's tie rules:
    lowest weighted child gini, then lowest feature index, then lowest
    threshold. decrease is parent gini minus the weighted child gini, per
    sample.
    """
    n, n_feat = x.shape

    def gini_of(labels):
        if len(labels) == 0:
            return 0.0
        _, counts = np.unique(labels, return_counts=True)
        p = counts / len(labels)
        return 1.0 - float(np.sum(p * p))

    parent = gini_of(y)
    best = None  # (weighted, feature, threshold)
    for f in range(n_feat):
        vals = np.unique(x[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = 0.5 * (lo + hi)
            mask = x[:, f] <= thr
            nl, nr = int(mask.sum()), int((~mask).sum())
            weighted = (nl * gini_of(y[mask]) + nr * gini_of(y[~mask])) / n
            cand = (weighted, f, thr)
            if best is None or cand < best:
                best = cand
    if best is None:
        return None
    weighted, f, thr = best
    return parent - weighted, f, thr


def brute_force_knn_predict(x_train, y_train, query, k, p):
    """All-pairs KNN with the package's tie rules, one pair at a time."""
    dists = np.array(
        [np.sum(np.abs(query - row) ** p) ** (1.0 / p) for row in x_train]
    )
    order = sorted(range(len(x_train)), key=lambda i: (dists[i], i))[:k]
    labels = [int(y_train[i]) for i in order]
    votes = {}
    for lab in labels:
        votes[lab] = votes.get(lab, 0) + 1
    top = max(votes.values())
    tied = [lab for lab, v in votes.items() if v == top]
    if len(tied) > 1:
        sums = {lab: sum(dists[i] for i in order if y_train[i] == lab) for lab in tied}
        lo = min(sums.values())
        tied = [lab for lab in tied if sums[lab] == lo]
    return min(tied)


def finite_difference_grads(loss_fn, params, eps=1e-6):
    """Central differences of a scalar loss over lists of weight/bias arrays."""
    grads_w, grads_b = [], []
    for arrs, out in ((params.weights, grads_w), (params.biases, grads_b)):
        for a in arrs:
            g = np.zeros_like(a)
            it = np.nditer(a, flags=["multi_index"])
            while not it.finished:
                ix = it.multi_index
                orig = a[ix]
                a[ix] = orig + eps
                up = loss_fn()
                a[ix] = orig - eps
                dn = loss_fn()
                a[ix] = orig
                g[ix] = (up - dn) / (2 * eps)
                it.iternext()
            out.append(g)
    return grads_w, grads_b


def kkt_report(machine, x_train_std, y_full, gamma, c):
    """Explicit KKT check of one trained binary machine.

    Reconstructs alpha for every training point of the pair (zero off the
    support set) and measures the worst violation of the three conditions.
    """
    pos, neg = machine["class_pos"], machine["class_neg"]
    idx = np.flatnonzero((y_full == pos) | (y_full == neg))
    y = np.where(y_full[idx] == pos, 1.0, -1.0)
    alpha = np.zeros(len(idx))
    sv_rows = machine["sv_rows"]              # rows into x_train_std
    coef = machine["coef"]
    pos_of = {int(t): i for i, t in enumerate(idx)}
    for rowid, cf in zip(sv_rows, coef):
        i = pos_of[int(rowid)]
        alpha[i] = cf * y[i]                  # coef = alpha * y
    sv = x_train_std[sv_rows]
    worst = 0.0
    for i, t in enumerate(idx):
        d2 = np.sum((x_train_std[t] - sv) ** 2, axis=1)
        fx = float(np.exp(-gamma * d2) @ coef - machine["b"])
        margin = y[i] * fx
        if alpha[i] <= 1e-9:
            worst = max(worst, 1.0 - margin)
        elif alpha[i] >= c - 1e-9:
            worst = max(worst, margin - 1.0)
        else:
            worst = max(worst, abs(margin - 1.0))
    return worst
