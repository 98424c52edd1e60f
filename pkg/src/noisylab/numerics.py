"""Small numeric helpers shared by every module.

Everything is float64 numpy. Random draws come from ``numpy.random.Generator``
backed by PCG64, whose output stream is fixed by its published recurrence, so a
seed reproduces the same draws on every platform.
"""
from __future__ import annotations

import numpy as np

FLOAT = np.float64


class NumericsError(ValueError):
    """Raised on non-finite inputs or shape mismatches."""


def make_rng(seed: int) -> np.random.Generator:
    if seed < 0:
        raise NumericsError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.uint64(seed)))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent child generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]


def as_matrix(a, rows: int | None = None, cols: int | None = None, name: str = "matrix") -> np.ndarray:
    """Validate a 2-D float64 array, optionally checking its shape."""
    m = np.asarray(a, dtype=FLOAT)
    if m.ndim != 2:
        raise NumericsError(f"{name} must be 2-D, got shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise NumericsError(f"{name} has {m.shape[0]} rows, expected {rows}")
    if cols is not None and m.shape[1] != cols:
        raise NumericsError(f"{name} has {m.shape[1]} cols, expected {cols}")
    if not np.all(np.isfinite(m)):
        raise NumericsError(f"{name} contains non-finite entries")
    return m


def softmax(logits, axis: int = -1) -> np.ndarray:
    """Max-shifted softmax along ``axis``."""
    z = np.asarray(logits, dtype=FLOAT)
    if z.size == 0:
        raise NumericsError("softmax of an empty vector")
    if not np.all(np.isfinite(z)):
        raise NumericsError("softmax received non-finite logits")
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(logits, axis: int = -1) -> np.ndarray:
    z = np.asarray(logits, dtype=FLOAT)
    if not np.all(np.isfinite(z)):
        raise NumericsError("log_softmax received non-finite logits")
    z = z - z.max(axis=axis, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


def log_sum_exp(values, axis: int | None = None) -> np.ndarray | float:
    """Stable ``log(sum(exp(values)))``.

    Entries equal to ``-inf`` are allowed and contribute nothing; a slice that
    is entirely ``-inf`` yields ``-inf``.
    """
    v = np.asarray(values, dtype=FLOAT)
    if v.size == 0:
        raise NumericsError("log_sum_exp of an empty vector")
    if np.any(np.isnan(v)) or np.any(v == np.inf):
        raise NumericsError("log_sum_exp received NaN or +inf")
    m = v.max(axis=axis, keepdims=True)
    safe_m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.exp(v - safe_m).sum(axis=axis, keepdims=True)) + safe_m
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def safe_log(a) -> np.ndarray:
    """Elementwise log mapping exact zeros to ``-inf`` without warnings."""
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(a, dtype=FLOAT))
