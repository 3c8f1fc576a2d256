"""Feature standardization and dataset splitting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Scaler":
        x = np.asarray(x, dtype=float)
        mean = x.mean(axis=0)
        std = np.maximum(x.std(axis=0), STD_FLOOR)
        return cls(mean=mean, std=std)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.std


def split(y, train_fraction: float = 0.9, seed: int = 0, stratified: bool = True):
    """Deterministic train/validation split returning sorted index arrays.

    Stratified mode keeps every class's share within one sample of
    proportional while hitting floor(n * train_fraction) exactly, using
    largest-remainder allocation (remainder ties broken by class id).
    """
    y = np.asarray(y)
    n = len(y)
    if n == 0:
        raise TrainingError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise TrainingError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    target = int(np.floor(n * train_fraction))

    if not stratified:
        perm = rng.permutation(n)
        return np.sort(perm[:target]), np.sort(perm[target:])

    classes, inverse = np.unique(y, return_inverse=True)
    takes = {}
    rems = []
    for ci, c in enumerate(classes):
        n_c = int(np.sum(inverse == ci))
        if n_c < 2:
            raise TrainingError(f"class {c} has {n_c} sample(s); stratified split needs at least 2")
        exact = n_c * train_fraction
        takes[ci] = int(np.floor(exact))
        rems.append((-(exact - np.floor(exact)), ci))
    deficit = target - sum(takes.values())
    for _, ci in sorted(rems)[:deficit]:
        takes[ci] += 1

    train_idx, val_idx = [], []
    for ci in range(len(classes)):
        idx_c = np.flatnonzero(inverse == ci)
        perm = rng.permutation(len(idx_c))
        k = takes[ci]
        train_idx.append(idx_c[perm[:k]])
        val_idx.append(idx_c[perm[k:]])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(val_idx))
