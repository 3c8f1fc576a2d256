"""Gaussian-kernel SVM trained by sequential minimal optimization.

Multi-class goes through one-vs-one binary machines (only for class pairs
present in the training data). Each machine maximizes the soft-margin dual
with box constraint 0 <= alpha <= C; the equality constraint sum(alpha*y)=0
is preserved exactly by the pairwise updates. Squared distances between all
training points are computed once and shared by every machine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SmoConvergenceError, TrainingError

_STEP_EPS = 1e-12


@dataclass(frozen=True)
class SvmConfig:
    C: float = 10.0
    gamma: float = 0.01
    tol: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        if self.C <= 0 or self.gamma <= 0 or self.tol <= 0 or self.max_passes < 1:
            raise TrainingError("SvmConfig values must be positive")


@dataclass
class BinaryMachine:
    class_pos: int               # compact id voted for when f >= 0
    class_neg: int
    sv_idx: np.ndarray           # indices into the shared support-vector matrix
    coef: np.ndarray             # alpha_i * y_i at the support vectors
    b: float
    kkt_violation: float


@dataclass
class SvmParams:
    sv: np.ndarray               # (n_sv, n_features), standardized
    machines: list[BinaryMachine]
    gamma: float


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    sa = np.sum(a * a, axis=1)
    sb = np.sum(b * b, axis=1)
    d2 = sa[:, None] + sb[None, :] - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _dual_objective(alpha, y, kmat):
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ kmat @ ay)


def kkt_violation(alpha, e, y, c):
    """Largest violation of the box-constrained KKT conditions."""
    r = e * y
    v_lo = np.where(alpha < c - _STEP_EPS, np.maximum(0.0, -r), 0.0)
    v_hi = np.where(alpha > _STEP_EPS, np.maximum(0.0, r), 0.0)
    return float(max(v_lo.max(), v_hi.max()))


def smo_solve(kernel_rows, m, y, config: SvmConfig, check_ascent: bool = False):
    """Run SMO on one binary problem.

    kernel_rows(i) returns row i of the kernel matrix; rows are cached so
    well-separated problems touch only a handful of them. Returns
    (alpha, b, final KKT violation). Raises SmoConvergenceError if the
    pass budget runs out with violations above tol.
    """
    c, tol = config.C, config.tol
    alpha = np.zeros(m)
    b = 0.0
    f = np.zeros(m)              # sum_j alpha_j y_j K(:, j), without -b
    cache: dict[int, np.ndarray] = {}

    def row(i):
        r = cache.get(i)
        if r is None:
            r = kernel_rows(i)
            cache[i] = r
        return r

    kmat_full = None
    if check_ascent:
        kmat_full = np.vstack([kernel_rows(i) for i in range(m)])
        w_prev = _dual_objective(alpha, y, kmat_full)

    def try_step(i, j, e):
        nonlocal b, f
        if i == j:
            return False
        ki, kj = row(i), row(j)
        eta = ki[i] + kj[j] - 2.0 * ki[j]
        if eta <= _STEP_EPS:
            return False
        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            lo, hi = max(0.0, aj_old - ai_old), min(c, c + aj_old - ai_old)
        else:
            lo, hi = max(0.0, ai_old + aj_old - c), min(c, ai_old + aj_old)
        if lo >= hi:
            return False
        aj_new = aj_old + y[j] * (e[i] - e[j]) / eta
        aj_new = min(hi, max(lo, aj_new))
        if abs(aj_new - aj_old) < _STEP_EPS:
            return False
        ai_new = ai_old + y[i] * y[j] * (aj_old - aj_new)
        alpha[i], alpha[j] = ai_new, aj_new
        di, dj = y[i] * (ai_new - ai_old), y[j] * (aj_new - aj_old)
        b1 = b + e[i] + di * ki[i] + dj * ki[j]
        b2 = b + e[j] + di * ki[j] + dj * kj[j]
        if _STEP_EPS < ai_new < c - _STEP_EPS:
            b = b1
        elif _STEP_EPS < aj_new < c - _STEP_EPS:
            b = b2
        else:
            b = 0.5 * (b1 + b2)
        f += di * ki + dj * kj
        if check_ascent:
            nonlocal_w = _dual_objective(alpha, y, kmat_full)
            if nonlocal_w < w_holder[0] - 1e-9:
                raise TrainingError(
                    f"SMO dual objective decreased: {w_holder[0]} -> {nonlocal_w}"
                )
            w_holder[0] = nonlocal_w
        return True

    w_holder = [w_prev] if check_ascent else [0.0]
    passes = 0
    e = f - b - y
    while passes < config.max_passes:
        any_violation = False
        any_change = False
        for i in range(m):
            r = e[i] * y[i]
            if not ((r < -tol and alpha[i] < c) or (r > tol and alpha[i] > 0)):
                continue
            any_violation = True
            gap = np.abs(e - e[i])
            gap[i] = -1.0
            j = int(np.argmax(gap))
            stepped = try_step(i, j, e)
            if not stepped:
                for j2 in range(m):
                    if j2 != j and try_step(i, j2, e):
                        stepped = True
                        break
            if stepped:
                any_change = True
                e = f - b - y
        if not any_violation:
            break
        if not any_change:
            break
        passes += 1

    e = f - b - y
    viol = kkt_violation(alpha, e, y, c)
    if viol > tol:
        raise SmoConvergenceError(
            f"SMO did not converge within {config.max_passes} passes "
            f"(KKT violation {viol:.3e} > tol {tol:.3e})",
            kkt_violation=viol,
        )
    return alpha, b, viol


def svm_fit(xs, yc, n_classes, config: SvmConfig, check_ascent: bool = False) -> SvmParams:
    """Train the one-vs-one machine set on standardized features."""
    classes_present = np.unique(yc)
    if len(classes_present) < 2:
        raise TrainingError("SVM training needs at least two classes")
    n = len(xs)
    d2_all = squared_distances(xs, xs)

    raw_machines = []  # (class_pos, class_neg, idx, alpha, b, viol)
    sv_global: set[int] = set()
    for a_i in range(len(classes_present)):
        for b_i in range(a_i + 1, len(classes_present)):
            ca, cb = int(classes_present[a_i]), int(classes_present[b_i])
            idx = np.flatnonzero((yc == ca) | (yc == cb))
            ypm = np.where(yc[idx] == ca, 1.0, -1.0)

            def kernel_rows(i, idx=idx):
                return np.exp(-config.gamma * d2_all[idx[i], idx])

            alpha, bias, viol = smo_solve(kernel_rows, len(idx), ypm, config,
                                          check_ascent=check_ascent)
            sv_mask = alpha > _STEP_EPS
            sv_train = idx[sv_mask]
            sv_global.update(int(t) for t in sv_train)
            raw_machines.append((ca, cb, sv_train, alpha[sv_mask] * ypm[sv_mask], bias, viol))

    sv_union = np.array(sorted(sv_global), dtype=int)
    remap = {int(t): k for k, t in enumerate(sv_union)}
    machines = [
        BinaryMachine(
            class_pos=ca,
            class_neg=cb,
            sv_idx=np.array([remap[int(t)] for t in sv_train], dtype=int),
            coef=coef,
            b=bias,
            kkt_violation=viol,
        )
        for ca, cb, sv_train, coef, bias, viol in raw_machines
    ]
    return SvmParams(sv=xs[sv_union].copy(), machines=machines, gamma=config.gamma)


def svm_decision_votes(params: SvmParams, xs):
    """Vote counts and signed decision sums per compact class."""
    nq = len(xs)
    kq = np.exp(-params.gamma * squared_distances(xs, params.sv))
    n_classes = 1 + max(max(m.class_pos, m.class_neg) for m in params.machines)
    votes = np.zeros((nq, n_classes), dtype=int)
    sums = np.zeros((nq, n_classes))
    for m in params.machines:
        fvals = kq[:, m.sv_idx] @ m.coef - m.b
        pos = fvals >= 0
        votes[pos, m.class_pos] += 1
        votes[~pos, m.class_neg] += 1
        sums[:, m.class_pos] += fvals
        sums[:, m.class_neg] -= fvals
    return votes, sums


def svm_predict_compact(params: SvmParams, xs) -> np.ndarray:
    """Majority vote over the machines; ties break on summed decision values,
    then the lowest class id."""
    votes, sums = svm_decision_votes(params, xs)
    out = np.empty(len(xs), dtype=int)
    for i in range(len(xs)):
        v = votes[i]
        best = np.flatnonzero(v == v.max())
        if len(best) > 1:
            s = sums[i, best]
            best = best[s == s.max()]
        out[i] = int(best[0])
    return out
