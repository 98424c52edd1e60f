"""Synthetic Gaussian-blob datasets and a CSV loader."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .noise import NoiseSpec, corrupt_labels
from .numerics import FLOAT


class DataError(ValueError):
    pass


@dataclass
class NoisyDataset:
    X: np.ndarray
    clean: np.ndarray
    noisy: np.ndarray | None = None
    noise: NoiseSpec | None = None

    def __len__(self):
        return self.X.shape[0]

    def with_noise(self, spec: NoiseSpec, rng: np.random.Generator) -> "NoisyDataset":
        return NoisyDataset(self.X, self.clean, corrupt_labels(self.clean, spec.transition(), rng), spec)

    def subset(self, idx) -> "NoisyDataset":
        noisy = None if self.noisy is None else self.noisy[idx]
        return NoisyDataset(self.X[idx], self.clean[idx], noisy, self.noise)


def class_means(c: int, dim: int, separation: float) -> np.ndarray:
    """Scaled simplex vertices when ``dim >= c``, otherwise points on a circle."""
    means = np.zeros((c, dim), dtype=FLOAT)
    if dim >= c:
        means[np.arange(c), np.arange(c)] = separation
    else:
        angles = 2 * np.pi * np.arange(c) / c
        means[:, 0] = separation * np.cos(angles)
        means[:, 1] = separation * np.sin(angles)
    return means


def make_synthetic_dataset(c: int, n_per_class: int, dim: int, separation: float,
                           rng: np.random.Generator, cluster_std: float = 1.0) -> NoisyDataset:
    """Balanced isotropic Gaussian clusters, shuffled. Labels are clean only."""
    if c < 2:
        raise DataError(f"need at least 2 classes, got {c}")
    if n_per_class < 1:
        raise DataError(f"n_per_class must be positive, got {n_per_class}")
    if dim < 2:
        raise DataError(f"dim must be at least 2, got {dim}")
    if separation <= 0 or cluster_std <= 0:
        raise DataError("separation and cluster_std must be positive")
    y = np.repeat(np.arange(c, dtype=np.int64), n_per_class)
    X = class_means(c, dim, separation)[y] + cluster_std * rng.standard_normal((y.shape[0], dim))
    order = rng.permutation(y.shape[0])
    return NoisyDataset(X[order], y[order])


def load_csv_dataset(path) -> NoisyDataset:
    """Feature columns followed by one integer label column; an optional header row is skipped."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if lines:
        try:
            [float(v) for v in lines[0].split(",")]
        except ValueError:
            lines = lines[1:]
    if not lines:
        raise DataError(f"{path} contains no data rows")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines], dtype=FLOAT)
    if rows.shape[1] < 2:
        raise DataError(f"{path} needs at least one feature column and a label column")
    labels = rows[:, -1]
    if np.any(labels != np.round(labels)) or np.any(labels < 0):
        raise DataError(f"{path}: label column must hold non-negative integers")
    return NoisyDataset(rows[:, :-1].copy(), labels.astype(np.int64))


def train_test_split(ds: NoisyDataset, test_fraction: float, rng: np.random.Generator):
    if not 0 < test_fraction < 1:
        raise DataError("test_fraction must lie in (0, 1)")
    order = rng.permutation(len(ds))
    n_test = int(round(test_fraction * len(ds)))
    return ds.subset(order[n_test:]), ds.subset(order[:n_test])
