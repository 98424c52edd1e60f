"""Matrix smoothing of transition matrices.

Three ways to flatten a row-stochastic matrix ``T`` toward the uniform
distribution before it is used to update the classifier:

* power:       ``S_ij = T_ij**beta / sum_l T_il**beta`` with ``beta`` in (0, 1]
* linear:      ``S = gamma*T + (1 - gamma)/c`` with ``gamma`` in (0, 1]
* temperature: ``S_ij = softmax_l(log T_il / gamma)_j`` with ``gamma >= 1``

The power method keeps zero entries at exactly zero; the linear method fills
them in, and the temperature method is undefined on them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import NoiseError, check_transition
from .numerics import FLOAT, softmax

UNIFORM_PATTERN_TOL = 1e-9
METHODS = ("power", "linear", "temperature")


class SmoothingError(ValueError):
    pass


@dataclass(frozen=True)
class SmoothingConfig:
    method: str
    param: float

    def __post_init__(self):
        if self.method not in METHODS:
            raise SmoothingError(f"unknown smoothing method {self.method!r}; expected one of {METHODS}")
        _check_param(self.method, self.param)

    def apply(self, T) -> np.ndarray:
        return smooth(T, self)

    @property
    def label(self) -> str:
        return {"power": "MS", "linear": "L", "temperature": "T"}[self.method]


def _check_param(method: str, value: float) -> None:
    if method in ("power", "linear"):
        if not 0 < value <= 1:
            name = "beta" if method == "power" else "gamma"
            raise SmoothingError(f"{method} smoothing needs {name} in (0, 1], got {value}")
    elif not value >= 1:
        raise SmoothingError(f"temperature smoothing needs gamma >= 1, got {value}")


def _as_transition(T) -> np.ndarray:
    try:
        return check_transition(T)
    except NoiseError as exc:
        raise SmoothingError(str(exc)) from exc


def smooth_power(T, beta: float) -> np.ndarray:
    _check_param("power", beta)
    T = _as_transition(T)
    if np.any(T.sum(axis=1) == 0):
        raise SmoothingError("cannot normalise an all-zero row")
    if beta == 1:
        return T.copy()
    pos = T > 0
    powered = np.zeros_like(T)
    powered[pos] = np.exp(beta * np.log(T[pos]))
    return powered / powered.sum(axis=1, keepdims=True)


def smooth_linear(T, gamma: float) -> np.ndarray:
    _check_param("linear", gamma)
    T = _as_transition(T)
    if gamma == 1:
        return T.copy()
    c = T.shape[0]
    return gamma * T + (1.0 - gamma) / c


def smooth_temperature(T, gamma: float) -> np.ndarray:
    _check_param("temperature", gamma)
    T = _as_transition(T)
    if np.any(T <= 0):
        raise SmoothingError("temperature smoothing needs strictly positive entries (log 0 is -inf)")
    if gamma == 1:
        return T.copy()
    return softmax(np.log(T) / gamma, axis=1)


def smooth(T, cfg: SmoothingConfig | None) -> np.ndarray:
    """Dispatch on ``cfg.method``; ``None`` returns ``T`` unchanged."""
    if cfg is None:
        return _as_transition(T)
    if cfg.method == "power":
        return smooth_power(T, cfg.param)
    if cfg.method == "linear":
        return smooth_linear(T, cfg.param)
    return smooth_temperature(T, cfg.param)


def compute_alpha(c: int, eta: float, beta: float) -> float:
    """Weight of the original posterior inside the power-smoothed posterior.

    Only defined for uniform noise. Smoothing the uniform matrix with rate
    ``eta`` gives a uniform matrix whose diagonal is ``s``; writing that as
    ``alpha*T + (1 - alpha)/c`` yields ``alpha = (s - 1/c) / (1 - eta - 1/c)``.
    """
    if c < 2:
        raise SmoothingError(f"need at least 2 classes, got {c}")
    if not 0 <= eta < 1:
        raise SmoothingError(f"noise rate must lie in [0, 1), got {eta}")
    if not 0 <= beta <= 1:
        raise SmoothingError(f"beta must lie in [0, 1], got {beta}")
    denom = 1.0 - eta - 1.0 / c
    if abs(denom) < 1e-12:
        raise SmoothingError(f"alpha is undefined at the singular noise rate eta = 1 - 1/c = {1 - 1 / c}")
    keep = (1.0 - eta) ** beta
    flip = (c - 1) * (eta / (c - 1)) ** beta
    return (keep / (keep + flip) - 1.0 / c) / denom


def effective_uniform_rate(S) -> float | None:
    """Noise rate of ``S`` if it has the uniform-noise pattern, else ``None``."""
    m = np.asarray(S, dtype=FLOAT)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        return None
    c = m.shape[0]
    diag = np.diag(m)
    off = m[~np.eye(c, dtype=bool)]
    d = diag.mean()
    o = off.mean()
    tol = UNIFORM_PATTERN_TOL
    if np.max(np.abs(diag - d)) > tol or np.max(np.abs(off - o)) > tol:
        return None
    if abs(d + (c - 1) * o - 1.0) > tol:
        return None
    return float(1.0 - d)


def linear_gamma_for_rate(c: int, eta: float, target_eta: float) -> float:
    """``gamma`` making linear smoothing of uniform(c, eta) land on rate ``target_eta``."""
    denom = 1.0 - eta - 1.0 / c
    if abs(denom) < 1e-12:
        raise SmoothingError("linear smoothing cannot move a matrix at the uniform point")
    gamma = (1.0 - target_eta - 1.0 / c) / denom
    if 1.0 < gamma <= 1.0 + 1e-12:  # round-off when target_eta == eta
        gamma = 1.0
    return gamma
