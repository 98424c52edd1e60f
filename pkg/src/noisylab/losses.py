"""Training objectives and their label-correction targets.

Every loss here has a logit gradient of the form ``p - t`` for some target
distribution ``t``, so training reduces to soft-target cross-entropy through
``model.backward``. For the forward loss the target is the posterior of the
clean label given the noisy one; for the smoothed forward loss it is the same
posterior computed with the smoothed matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model as mlp
from .noise import build_uniform, check_transition
from .numerics import FLOAT, log_sum_exp, safe_log
from .smoothing import SmoothingConfig, compute_alpha, smooth

KINDS = ("ce", "ls", "forward", "forward_smoothed", "gce")


class LossError(ValueError):
    pass


@dataclass(frozen=True)
class LossSpec:
    kind: str
    epsilon: float = 0.0  # label smoothing; also valid for the forward kinds
    T: np.ndarray | None = None
    smoothing: SmoothingConfig | None = None
    q: float = 0.7

    def __post_init__(self):
        if self.kind not in KINDS:
            raise LossError(f"unknown loss kind {self.kind!r}; expected one of {KINDS}")
        if not 0 <= self.epsilon < 1:
            raise LossError(f"label smoothing epsilon must lie in [0, 1), got {self.epsilon}")
        if not 0 < self.q <= 1:
            raise LossError(f"GCE q must lie in (0, 1], got {self.q}")
        if self.kind in ("forward", "forward_smoothed"):
            if self.T is None:
                raise LossError(f"{self.kind} loss needs a transition matrix")
            object.__setattr__(self, "T", check_transition(self.T))
        if self.kind == "forward_smoothed" and self.smoothing is None:
            raise LossError("forward_smoothed loss needs a smoothing config")

    def update_matrix(self) -> np.ndarray:
        """The matrix the classifier is trained through (smoothed if configured)."""
        if self.kind == "forward_smoothed":
            return smooth(self.T, self.smoothing)
        return self.T


def _batch(p, j):
    P = np.asarray(p, dtype=FLOAT)
    single = P.ndim == 1
    if single:
        P = P[None, :]
    labels = np.atleast_1d(np.asarray(j)).astype(np.int64)
    if labels.shape[0] != P.shape[0]:
        raise LossError(f"{labels.shape[0]} labels for {P.shape[0]} probability vectors")
    c = P.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise LossError(f"noisy labels must lie in [0, {c})")
    return P, labels, single


def _log_mixture(logP, labels, T):
    """``log sum_i T[i, j] p_i`` per sample, computed in log space."""
    logT = safe_log(T)
    terms = logP + logT[:, labels].T
    out = log_sum_exp(terms, axis=1)
    if np.any(np.isneginf(out)):
        raise LossError("noisy label has zero probability under the model and transition matrix")
    return out, terms


def forward_loss(p, j, T) -> float | np.ndarray:
    """``-log sum_i T[i, j] * p_i`` for one sample or a batch."""
    T = check_transition(T)
    P, labels, single = _batch(p, j)
    out, _ = _log_mixture(safe_log(P), labels, T)
    loss = -out
    return float(loss[0]) if single else loss


def clean_posterior(p, j, T) -> np.ndarray:
    """Posterior ``p(y = i | noisy = j)`` with ``p`` as prior and column ``j`` of ``T`` as likelihood."""
    T = check_transition(T)
    P, labels, single = _batch(p, j)
    logm, terms = _log_mixture(safe_log(P), labels, T)
    post = np.exp(terms - logm[:, None])
    return post[0] if single else post


def smoothed_posterior(p, j, T, cfg: SmoothingConfig) -> np.ndarray:
    return clean_posterior(p, j, smooth(T, cfg))


def alpha_posterior(p, j, eta: float, beta: float) -> np.ndarray:
    """Power-smoothed posterior under uniform noise, via the alpha blend.

    ``q = (alpha * p(y, noisy) + (1 - alpha)/c * p(y)) / (alpha * p(noisy) + (1 - alpha)/c)``
    where the joint and marginal use the unsmoothed uniform matrix.
    """
    P, labels, single = _batch(p, j)
    c = P.shape[1]
    T = build_uniform(c, eta)
    a = compute_alpha(c, eta, beta)
    joint = P * T[:, labels].T
    marginal = joint.sum(axis=1, keepdims=True)
    q = (a * joint + (1.0 - a) / c * P) / (a * marginal + (1.0 - a) / c)
    return q[0] if single else q


def loss_and_target(spec: LossSpec, p, j):
    """Loss value(s) and the soft target whose CE gradient reproduces the loss gradient."""
    P, labels, single = _batch(p, j)
    n, c = P.shape
    onehot = np.zeros((n, c), dtype=FLOAT)
    onehot[np.arange(n), labels] = 1.0
    logP = safe_log(P)
    if spec.kind == "ce":
        target = onehot
        loss = -logP[np.arange(n), labels]
    elif spec.kind == "ls":
        target = (1.0 - spec.epsilon) * onehot + spec.epsilon / c
        loss = -np.sum(np.where(target > 0, target * logP, 0.0), axis=1)
    elif spec.kind in ("forward", "forward_smoothed"):
        M = spec.update_matrix()
        if M.shape[0] != c:
            raise LossError(f"transition matrix is {M.shape[0]}x{M.shape[0]} but model has {c} classes")
        if spec.epsilon == 0:
            logm, terms = _log_mixture(logP, labels, M)
            loss = -logm
            target = np.exp(terms - logm[:, None])
        else:
            # smoothed noisy labels: expected forward loss over every possible noisy label
            soft = (1.0 - spec.epsilon) * onehot + spec.epsilon / c
            terms = logP[:, :, None] + safe_log(M)[None, :, :]
            logm = log_sum_exp(terms, axis=1)
            if np.any(np.isneginf(logm)):
                raise LossError("a noisy label has zero probability under the transition matrix")
            loss = -np.sum(soft * logm, axis=1)
            target = np.einsum("nij,nj->ni", np.exp(terms - logm[:, None, :]), soft)
    else:
        pj = P[np.arange(n), labels]
        pq = pj ** spec.q
        loss = (1.0 - pq) / spec.q
        # d/dz of -(p_j^q)/q equals p_j^q (p - e_j), i.e. p - t with this t
        target = (1.0 - pq)[:, None] * P + pq[:, None] * onehot
    if single:
        return float(loss[0]), target[0]
    return loss, target


def batch_objective(spec: LossSpec, model, X, labels):
    """Mean loss over a batch and the parameter gradient of that mean."""
    P = mlp.forward(model, X)
    loss, target = loss_and_target(spec, P, labels)
    return float(np.mean(loss)), mlp.backward(model, X, target)


def mean_loss(spec: LossSpec, model, X, labels) -> float:
    loss, _ = loss_and_target(spec, mlp.forward(model, X), labels)
    return float(np.mean(loss))


def _relative_discrepancy(a: list[np.ndarray], b: list[np.ndarray]) -> float:
    worst = 0.0
    for x, y in zip(a, b):
        scale = max(np.max(np.abs(x)), np.max(np.abs(y)))
        if scale == 0:
            continue
        worst = max(worst, float(np.max(np.abs(x - y)) / scale))
    return worst


def direct_forward_gradient(model, x, j: int, T) -> mlp.GradientSet:
    """Gradient of ``-log sum_i T_ij p_i`` taken through each ``dp_i/dw``.

    Differentiates the mixture term by term: ``-sum_i T_ij / m * dp_i/dw`` with
    ``dp_i/dz = p_i (e_i - p)`` backpropagated separately for every class.
    """
    T = check_transition(T)
    x = np.asarray(x, dtype=FLOAT)
    p = mlp.forward(model, x)
    c = p.shape[0]
    m = float(T[:, j] @ p)
    if m <= 0:
        raise LossError("noisy label has zero probability under the model and transition matrix")
    total = None
    for i in range(c):
        dpi_dz = p[i] * (np.eye(c)[i] - p)
        g = mlp.backward_from_logits(model, x, dpi_dz)
        w = -T[i, j] / m
        scaled = [w * a for a in g.params]
        total = scaled if total is None else [t + s for t, s in zip(total, scaled)]
    n = len(model.weights)
    return mlp.GradientSet(total[:n], total[n:])


def verify_gradient_identity(model, x, j: int, T) -> float:
    """Max relative discrepancy between the direct and label-correction gradients."""
    direct = direct_forward_gradient(model, x, j, T)
    post = clean_posterior(mlp.forward(model, x), j, T)
    corrected = mlp.backward(model, x, post)
    return _relative_discrepancy(direct.params, corrected.params)
