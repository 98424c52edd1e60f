"""Transition-matrix estimation.

Two schemes:

* perfect-sample estimation: after training a classifier on noisy labels,
  row ``i`` of the estimate is the classifier's output at the sample it is
  most confident belongs to class ``i``;
* an adaptation layer: a row-softmax matrix learned jointly with the
  classifier. The classifier step may use a smoothed copy of the matrix;
  the matrix step always uses the plain forward loss.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model as mlp
from .losses import LossError
from .noise import check_transition
from .numerics import FLOAT, as_matrix, log_sum_exp, safe_log, softmax
from .smoothing import SmoothingConfig, smooth


class EstimationError(ValueError):
    pass


def estimate_perfect_samples(model: mlp.MlpModel, X, labels=None,
                             percentile: float | None = None) -> np.ndarray:
    """Estimate ``T`` from a trained classifier's outputs on ``X``.

    By default the exemplar for class ``i`` is the argmax of ``p(y=i|x)`` over
    all of ``X``. Passing ``labels`` restricts class ``i``'s candidates to the
    samples labelled ``i``. With ``percentile`` set, the exemplar is the
    candidate whose ``p(y=i|x)`` is closest to that percentile of the
    candidates' scores instead of the maximum (more robust to outliers).
    """
    X = as_matrix(X, cols=model.layer_dims[0], name="features")
    if X.shape[0] == 0:
        raise EstimationError("cannot estimate from an empty dataset")
    P = mlp.forward(model, X)
    c = P.shape[1]
    if labels is not None:
        labels = np.asarray(labels)
        missing = [i for i in range(c) if not np.any(labels == i)]
        if missing:
            raise EstimationError(f"no candidate samples for classes {missing}")
    est = np.empty((c, c), dtype=FLOAT)
    for i in range(c):
        idx = np.arange(X.shape[0]) if labels is None else np.flatnonzero(labels == i)
        scores = P[idx, i]
        if percentile is None:
            k = idx[int(np.argmax(scores))]
        else:
            thresh = np.percentile(scores, percentile, method="higher")
            k = idx[int(np.argmin(np.abs(scores - thresh)))]
        est[i] = P[k]
    est /= est.sum(axis=1, keepdims=True)
    return check_transition(est, name="estimated transition matrix")


@dataclass
class AlSchedule:
    warmup_epochs: int = 15
    matrix_lr: float = 0.1
    matrix_momentum: float = 0.9

    def __post_init__(self):
        if self.warmup_epochs < 0:
            raise EstimationError("warmup_epochs must be non-negative")
        if self.matrix_lr <= 0:
            raise EstimationError("matrix_lr must be positive")


@dataclass
class AdaptationLayer:
    """Learned transition matrix ``T = row_softmax(B)``."""

    logits: np.ndarray
    opt: mlp.OptimizerState = field(default=None, repr=False)

    def __post_init__(self):
        self.logits = as_matrix(self.logits, name="adaptation logits")
        if self.logits.shape[0] != self.logits.shape[1]:
            raise EstimationError("adaptation logits must be square")

    @property
    def matrix(self) -> np.ndarray:
        return softmax(self.logits, axis=1)

    @property
    def n_classes(self) -> int:
        return self.logits.shape[0]


def al_init_identity(c: int, epsilon_noise: float = 1e-2, rng: np.random.Generator | None = None,
                     kappa: float = 6.0) -> AdaptationLayer:
    """Logits ``kappa * I`` plus uniform jitter in ``[-epsilon_noise, epsilon_noise]``."""
    if epsilon_noise <= 0:
        raise EstimationError("epsilon_noise must be positive")
    if rng is None:
        raise EstimationError("al_init_identity needs an explicit rng")
    B = kappa * np.eye(c) + rng.uniform(-epsilon_noise, epsilon_noise, size=(c, c))
    return AdaptationLayer(B)


def layer_forward_loss(layer_logits, P, labels) -> float:
    """Mean ``-log sum_i T_ij p_i`` with ``T = row_softmax(layer_logits)``."""
    logT = layer_logits - log_sum_exp(layer_logits, axis=1)[:, None]
    terms = safe_log(P) + logT[:, labels].T
    return float(-np.mean(log_sum_exp(terms, axis=1)))


def layer_gradient(layer: AdaptationLayer, P, labels) -> np.ndarray:
    """Gradient of the batch-mean forward loss with respect to the layer logits."""
    P = np.asarray(P, dtype=FLOAT)
    labels = np.asarray(labels, dtype=np.int64)
    n, c = P.shape
    T = layer.matrix
    m = np.einsum("ni,in->n", P, T[:, labels])
    if np.any(m <= 0):
        raise LossError("noisy label has zero probability under the adaptation layer")
    # dL/dT[i, j] = -(1/n) sum_{n: label_n = j} P[n, i] / m_n
    onehot = np.zeros((n, c))
    onehot[np.arange(n), labels] = 1.0
    dT = -(P / m[:, None]).T @ onehot / n
    # row softmax: dB_ik = T_ik (dT_ik - sum_l T_il dT_il)
    return T * (dT - np.sum(T * dT, axis=1, keepdims=True))


def al_train_step(model: mlp.MlpModel, model_opt: mlp.OptimizerState, layer: AdaptationLayer,
                  X, labels, epoch: int, schedule: AlSchedule,
                  smoothing: SmoothingConfig | None = None, lr: float | None = None):
    """One decoupled step: classifier through the (smoothed) fixed matrix, then the matrix.

    Returns ``(model, layer, batch_loss)`` where the loss is the unsmoothed
    forward loss before either update.
    """
    X = np.asarray(X, dtype=FLOAT)
    labels = np.asarray(labels, dtype=np.int64)
    if X.shape[0] == 0:
        raise EstimationError("empty batch")
    lr = model_opt.lr(epoch) if lr is None else lr

    T = layer.matrix
    S = smooth(T, smoothing) if smoothing is not None else T
    P = mlp.forward(model, X)
    logP = safe_log(P)
    loss = float(-np.mean(log_sum_exp(logP + safe_log(T)[:, labels].T, axis=1)))
    terms = logP + safe_log(S)[:, labels].T
    target = np.exp(terms - log_sum_exp(terms, axis=1)[:, None])
    mlp.sgd_step(model, model_opt, mlp.backward(model, X, target), lr=lr)

    if epoch >= schedule.warmup_epochs:
        if layer.opt is None:
            layer.opt = mlp.OptimizerState(learning_rate=schedule.matrix_lr,
                                           momentum=schedule.matrix_momentum,
                                           weight_decay=0.0,
                                           milestones=model_opt.milestones)
        P_new = mlp.forward(model, X)
        grad = layer_gradient(layer, P_new, labels)
        mlp.sgd_update([layer.logits], [grad], layer.opt, layer.opt.lr(epoch), [False])
    return model, layer, loss


def diagonal_trace(history) -> np.ndarray:
    """``(epochs, c)`` array of diagonal entries from matrices or layers."""
    if len(history) == 0:
        raise EstimationError("empty history")
    rows = []
    for h in history:
        T = h.matrix if isinstance(h, AdaptationLayer) else np.asarray(h, dtype=FLOAT)
        rows.append(np.diag(T).copy())
    return np.vstack(rows)
