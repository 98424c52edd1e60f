"""Multilayer perceptron with hand-written backpropagation and SGD.

Weights are stored as ``(fan_in, fan_out)`` matrices so a batch ``X`` of shape
``(n, fan_in)`` maps to ``X @ W + b``. Hidden layers use ReLU; the output layer
is a softmax over ``c`` classes.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import FLOAT, NumericsError, log_softmax, softmax

CHECKPOINT_VERSION = 1


@dataclass
class MlpModel:
    layer_dims: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"

    def __post_init__(self):
        if len(self.layer_dims) < 2:
            raise NumericsError("an MLP needs at least an input and an output dimension")
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise NumericsError("number of parameter arrays does not match layer_dims")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_dims[k], self.layer_dims[k + 1])
            if w.shape != expected:
                raise NumericsError(f"layer {k} weight has shape {w.shape}, expected {expected}")
            if b.shape != (expected[1],):
                raise NumericsError(f"layer {k} bias has shape {b.shape}, expected ({expected[1]},)")
        if self.activation != "relu":
            raise NumericsError(f"unsupported activation {self.activation!r}")

    @property
    def n_classes(self) -> int:
        return self.layer_dims[-1]

    @property
    def params(self) -> list[np.ndarray]:
        return self.weights + self.biases

    def copy(self) -> "MlpModel":
        return MlpModel(list(self.layer_dims), [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases], self.activation)


@dataclass
class GradientSet:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def params(self) -> list[np.ndarray]:
        return self.weights + self.biases


@dataclass
class OptimizerState:
    learning_rate: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 1e-4
    milestones: tuple[int, ...] = ()
    velocity: list[np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        self.milestones = tuple(sorted(int(m) for m in self.milestones))

    def lr(self, epoch: int) -> float:
        return lr_at_epoch(self.learning_rate, self.milestones, epoch)


def init_mlp(layer_dims, rng: np.random.Generator) -> MlpModel:
    """Glorot-uniform weights, zero biases."""
    dims = [int(d) for d in layer_dims]
    if any(d < 1 for d in dims):
        raise NumericsError(f"layer dimensions must be positive, got {dims}")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out, dtype=FLOAT))
    return MlpModel(dims, weights, biases)


def zeros_like_model(layer_dims) -> MlpModel:
    dims = [int(d) for d in layer_dims]
    return MlpModel(dims, [np.zeros((a, b)) for a, b in zip(dims[:-1], dims[1:])],
                    [np.zeros(b) for b in dims[1:]])


def _as_batch(model: MlpModel, x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=FLOAT)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != model.layer_dims[0]:
        raise NumericsError(
            f"input has shape {np.shape(x)}, expected (..., {model.layer_dims[0]})")
    return a, single


def _forward_cache(model: MlpModel, X: np.ndarray):
    acts = [X]
    h = X
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        h = z if k == last else np.maximum(z, 0.0)
        acts.append(h)
    return acts


def logits(model: MlpModel, x) -> np.ndarray:
    X, single = _as_batch(model, x)
    z = _forward_cache(model, X)[-1]
    return z[0] if single else z


def forward(model: MlpModel, x) -> np.ndarray:
    """Class probabilities for one sample (1-D) or a batch (2-D)."""
    return softmax(logits(model, x), axis=-1)


def forward_log(model: MlpModel, x) -> np.ndarray:
    return log_softmax(logits(model, x), axis=-1)


def backward_from_logits(model: MlpModel, x, dlogits) -> GradientSet:
    """Backpropagate an upstream gradient on the output logits.

    ``dlogits`` carries the already-averaged gradient per sample; contributions
    are summed over the batch.
    """
    X, single = _as_batch(model, x)
    d = np.asarray(dlogits, dtype=FLOAT)
    if single:
        d = d[None, :]
    if d.shape != (X.shape[0], model.n_classes):
        raise NumericsError(f"dlogits has shape {d.shape}, expected {(X.shape[0], model.n_classes)}")
    acts = _forward_cache(model, X)
    gw = [None] * len(model.weights)
    gb = [None] * len(model.weights)
    for k in range(len(model.weights) - 1, -1, -1):
        gw[k] = acts[k].T @ d
        gb[k] = d.sum(axis=0)
        if k:
            d = (d @ model.weights[k].T) * (acts[k] > 0)
    return GradientSet(gw, gb)


def backward(model: MlpModel, x, target_distribution) -> GradientSet:
    """Gradient of the mean soft-target cross-entropy ``-sum_i t_i log p_i``.

    Accepts a single sample with a length-``c`` target or a batch with an
    ``(n, c)`` target array.
    """
    t = np.asarray(target_distribution, dtype=FLOAT)
    X, single = _as_batch(model, x)
    if single:
        t = t[None, :]
    if t.shape != (X.shape[0], model.n_classes):
        raise NumericsError(f"target has shape {t.shape}, expected {(X.shape[0], model.n_classes)}")
    if np.any(t < -1e-12) or np.any(np.abs(t.sum(axis=1) - 1.0) > 1e-9):
        raise NumericsError("target must be a probability distribution (non-negative, sums to 1)")
    p = forward(model, X)
    return backward_from_logits(model, X, (p - t) / X.shape[0])


def soft_cross_entropy(model: MlpModel, x, target_distribution) -> float:
    """Mean of ``-sum_i t_i log p_i`` over the batch."""
    logp = forward_log(model, x)
    t = np.asarray(target_distribution, dtype=FLOAT)
    return float(-np.mean(np.sum(t * logp, axis=-1)))


def lr_at_epoch(base_lr: float, milestones, epoch: int) -> float:
    """Step schedule: divide by 10 once for every milestone already reached."""
    if epoch < 0:
        raise ValueError("epoch must be non-negative")
    passed = sum(1 for m in milestones if epoch >= m)
    return base_lr / (10.0 ** passed)


def sgd_update(params: list[np.ndarray], grads: list[np.ndarray], state: OptimizerState,
               lr: float, decay_mask: list[bool] | None = None) -> None:
    """In-place momentum SGD: ``v <- mu*v + (g + wd*w)``; ``w <- w - lr*v``."""
    if len(params) != len(grads):
        raise NumericsError("parameter and gradient lists differ in length")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    if state.velocity is None:
        state.velocity = [np.zeros_like(p) for p in params]
    if decay_mask is None:
        decay_mask = [True] * len(params)
    for p, g, v, decay in zip(params, grads, state.velocity, decay_mask):
        if p.shape != g.shape or p.shape != v.shape:
            raise NumericsError(f"shape mismatch in sgd update: {p.shape}, {g.shape}, {v.shape}")
        step = g + state.weight_decay * p if decay and state.weight_decay else g
        v *= state.momentum
        v += step
        p -= lr * v


def sgd_step(model: MlpModel, state: OptimizerState, grads: GradientSet,
             lr: float | None = None) -> tuple[MlpModel, OptimizerState]:
    """Apply one update to ``model`` in place. Weight decay skips biases."""
    mask = [True] * len(model.weights) + [False] * len(model.biases)
    sgd_update(model.params, grads.params, state,
               state.learning_rate if lr is None else lr, mask)
    return model, state


def predict(model: MlpModel, X) -> np.ndarray:
    return np.argmax(logits(model, X), axis=-1)


def accuracy(model: MlpModel, X, labels) -> float:
    """Percentage of samples whose argmax prediction equals ``labels``."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0.0
    return float(100.0 * np.mean(predict(model, X) == labels))


# Checkpoint layout: an uncompressed .npz with
#   version      int64 scalar (CHECKPOINT_VERSION)
#   layer_dims   int64 vector
#   activation   unicode scalar
#   W0..W{L-1}   float64 (fan_in, fan_out)
#   b0..b{L-1}   float64 (fan_out,)
def save_checkpoint(model: MlpModel, path) -> None:
    arrays = {
        "version": np.array(CHECKPOINT_VERSION, dtype=np.int64),
        "layer_dims": np.array(model.layer_dims, dtype=np.int64),
        "activation": np.array(model.activation),
    }
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"W{k}"] = w
        arrays[f"b{k}"] = b
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    Path(path).write_bytes(buf.getvalue())


def load_checkpoint(path) -> MlpModel:
    with np.load(Path(path), allow_pickle=False) as data:
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        dims = [int(d) for d in data["layer_dims"]]
        n = len(dims) - 1
        weights = [data[f"W{k}"].astype(FLOAT) for k in range(n)]
        biases = [data[f"b{k}"].astype(FLOAT) for k in range(n)]
        activation = str(data["activation"])
    return MlpModel(dims, weights, biases, activation)
