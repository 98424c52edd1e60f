"""Class-conditional label noise: transition matrices and label corruption.

A transition matrix ``T`` is a ``(c, c)`` float64 array with
``T[i, j] = p(noisy = j | clean = i)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .numerics import FLOAT

ROW_TOL = 1e-9


class NoiseError(ValueError):
    pass


def check_transition(T, name: str = "transition matrix") -> np.ndarray:
    """Return ``T`` as float64 after checking it is square and row-stochastic."""
    m = np.asarray(T, dtype=FLOAT)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NoiseError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NoiseError(f"{name} has non-finite entries")
    if np.any(m < 0) or np.any(m > 1):
        raise NoiseError(f"{name} has entries outside [0, 1]")
    err = np.abs(m.sum(axis=1) - 1.0)
    if np.any(err > ROW_TOL):
        bad = int(np.argmax(err))
        raise NoiseError(f"{name} row {bad} sums to {m[bad].sum()!r}, expected 1")
    return m


def cyclic_pairs(c: int) -> Callable[[int], int]:
    """Default asymmetric flip pattern ``i -> i + 1 (mod c)``."""
    return lambda i: (i + 1) % c


@dataclass(frozen=True)
class NoiseSpec:
    kind: str  # "uniform", "asymmetric" or "explicit"
    eta: float
    c: int
    pair_map: Callable[[int], int] | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "asymmetric", "explicit"):
            raise NoiseError(f"unknown noise kind {self.kind!r}")
        if not 0 <= self.eta < 1:
            raise NoiseError(f"noise rate must lie in [0, 1), got {self.eta}")
        if self.kind == "explicit" and self.matrix is None:
            raise NoiseError("explicit noise needs a matrix")

    def transition(self) -> np.ndarray:
        if self.kind == "uniform":
            return build_uniform(self.c, self.eta)
        if self.kind == "asymmetric":
            return build_asymmetric(self.c, self.eta, self.pair_map or cyclic_pairs(self.c))
        return check_transition(self.matrix)


def build_uniform(c: int, eta: float) -> np.ndarray:
    if c < 2:
        raise NoiseError(f"need at least 2 classes, got {c}")
    if not 0 <= eta < 1:
        raise NoiseError(f"noise rate must lie in [0, 1), got {eta}")
    T = np.full((c, c), eta / (c - 1), dtype=FLOAT)
    np.fill_diagonal(T, 1.0 - eta)
    return T


def build_asymmetric(c: int, eta: float, pair_map: Callable[[int], int] | None = None) -> np.ndarray:
    """Each class ``i`` keeps its label w.p. ``1 - eta`` and flips to ``pair_map(i)`` otherwise."""
    if c < 2:
        raise NoiseError(f"need at least 2 classes, got {c}")
    if not 0 <= eta < 1:
        raise NoiseError(f"noise rate must lie in [0, 1), got {eta}")
    pair_map = pair_map or cyclic_pairs(c)
    T = np.zeros((c, c), dtype=FLOAT)
    for i in range(c):
        j = int(pair_map(i))
        if j == i:
            raise NoiseError(f"pair_map maps class {i} to itself")
        if not 0 <= j < c:
            raise NoiseError(f"pair_map maps class {i} to out-of-range class {j}")
        T[i, i] = 1.0 - eta
        T[i, j] += eta
    return T


def corrupt_labels(clean_labels, T, rng: np.random.Generator) -> np.ndarray:
    """Draw each noisy label independently from row ``T[y]``.

    Uses one uniform draw per sample and inverse-CDF lookup on the row, so the
    result depends only on the seed and the label sequence.
    """
    T = check_transition(T)
    c = T.shape[0]
    y = np.asarray(clean_labels)
    if y.size and (y.min() < 0 or y.max() >= c):
        raise NoiseError(f"labels must lie in [0, {c})")
    y = y.astype(np.int64)
    cdf = np.cumsum(T, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(y.shape[0])
    noisy = (u[:, None] >= cdf[y]).sum(axis=1)
    return np.minimum(noisy, c - 1).astype(np.int64)


def empirical_transition(clean_labels, noisy_labels, c: int) -> np.ndarray:
    """Row-normalised confusion counts; rows of unseen classes become uniform."""
    y = np.asarray(clean_labels, dtype=np.int64)
    z = np.asarray(noisy_labels, dtype=np.int64)
    if y.shape != z.shape:
        raise NoiseError("clean and noisy label arrays differ in length")
    counts = np.zeros((c, c), dtype=FLOAT)
    np.add.at(counts, (y, z), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    out = np.full((c, c), 1.0 / c)
    seen = totals[:, 0] > 0
    out[seen] = counts[seen] / totals[seen]
    return out


def write_transition_csv(T, path) -> None:
    T = np.asarray(T, dtype=FLOAT)
    lines = [",".join(repr(float(v)) for v in row) for row in T]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_transition_csv(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rows.append([float(v) for v in line.split(",")])
    try:
        return check_transition(np.array(rows, dtype=FLOAT), name=str(path))
    except ValueError as exc:
        raise NoiseError(str(exc)) from exc
