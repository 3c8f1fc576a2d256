"""Multilayer perceptron: ReLU hidden layers, softmax output, cross-entropy
loss, Adam updates, early stopping on an inner validation slice."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceError, TrainingError


@dataclass(frozen=True)
class AnnConfig:
    hidden_sizes: tuple[int, ...] = (128, 64)
    lr: float = 1e-3
    batch: int = 128
    epochs: int = 60
    patience: int = 8
    seed: int = 0

    def __post_init__(self):
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise TrainingError("hidden_sizes must be positive")
        if self.lr <= 0 or self.batch < 1 or self.epochs < 1 or self.patience < 1:
            raise TrainingError("lr, batch, epochs and patience must be positive")


@dataclass
class AnnParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "AnnParams":
        return AnnParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_params(n_in: int, hidden_sizes, n_out: int, rng) -> AnnParams:
    """Uniform init scaled by 1/sqrt(fan_in), zero biases."""
    sizes = [n_in, *hidden_sizes, n_out]
    weights, biases = [], []
    for a, b in zip(sizes[:-1], sizes[1:]):
        s = 1.0 / np.sqrt(a)
        weights.append(rng.uniform(-s, s, size=(a, b)))
        biases.append(np.zeros(b))
    return AnnParams(weights, biases)


def forward(params: AnnParams, x):
    """Returns (logits, activations); activations[i] feeds layer i."""
    acts = [np.asarray(x, dtype=float)]
    h = acts[0]
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        acts.append(h)
    logits = h @ params.weights[-1] + params.biases[-1]
    return logits, acts


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(params: AnnParams, x, yc) -> float:
    logits, _ = forward(params, x)
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    return float(np.mean(lse - z[np.arange(len(yc)), yc]))


def gradients(params: AnnParams, x, yc):
    """Analytic cross-entropy gradients for every weight and bias."""
    n = len(yc)
    logits, acts = forward(params, x)
    p = softmax(logits)
    delta = p.copy()
    delta[np.arange(n), yc] -= 1.0
    delta /= n

    gw = [None] * len(params.weights)
    gb = [None] * len(params.biases)
    for layer in range(len(params.weights) - 1, -1, -1):
        gw[layer] = acts[layer].T @ delta
        gb[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params.weights[layer].T) * (acts[layer] > 0)
    return gw, gb


class Adam:
    def __init__(self, params: AnnParams, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.mw = [np.zeros_like(w) for w in params.weights]
        self.vw = [np.zeros_like(w) for w in params.weights]
        self.mb = [np.zeros_like(b) for b in params.biases]
        self.vb = [np.zeros_like(b) for b in params.biases]

    def step(self, params: AnnParams, gw, gb):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for i in range(len(params.weights)):
            for m, v, g, target in (
                (self.mw[i], self.vw[i], gw[i], params.weights[i]),
                (self.mb[i], self.vb[i], gb[i], params.biases[i]),
            ):
                m *= self.b1
                m += (1 - self.b1) * g
                v *= self.b2
                v += (1 - self.b2) * g * g
                target -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def ann_fit(xs, yc, n_classes, config: AnnConfig):
    """Train and return (best params, train meta)."""
    n, n_in = xs.shape
    rng = np.random.default_rng(config.seed)
    params = init_params(n_in, config.hidden_sizes, n_classes, rng)

    n_val = int(round(0.1 * n))
    if n_val == 0 or n - n_val == 0:
        tr_idx = va_idx = np.arange(n)
    else:
        perm = rng.permutation(n)
        va_idx, tr_idx = perm[:n_val], perm[n_val:]

    opt = Adam(params, config.lr)
    best_loss = cross_entropy(params, xs[va_idx], yc[va_idx])
    best_params = params.copy()
    best_epoch = 0
    epoch0_loss = best_loss
    bad = 0
    epochs_run = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(tr_idx))
        for lo in range(0, len(order), config.batch):
            sel = tr_idx[order[lo : lo + config.batch]]
            gw, gb = gradients(params, xs[sel], yc[sel])
            opt.step(params, gw, gb)
        loss = cross_entropy(params, xs[va_idx], yc[va_idx])
        if not np.isfinite(loss):
            raise DivergenceError(f"validation loss became {loss} at epoch {epoch}")
        epochs_run = epoch
        if loss < best_loss - 1e-12:
            best_loss, best_epoch, bad = loss, epoch, 0
            best_params = params.copy()
        else:
            bad += 1
            if bad >= config.patience:
                break
    meta = {
        "best_epoch": best_epoch,
        "best_inner_loss": best_loss,
        "epoch0_inner_loss": epoch0_loss,
        "epochs_run": epochs_run,
    }
    return best_params, meta


def ann_predict_compact(params: AnnParams, xs) -> np.ndarray:
    logits, _ = forward(params, xs)
    return np.argmax(softmax(logits), axis=1)
