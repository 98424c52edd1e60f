"""Self-checks behind ``noisylab verify``.

Each check returns a :class:`CheckResult`; :func:`run_all` runs the gradient
identity, finite-difference, smoothing-algebra, alpha and noise-statistics
checks.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import model as mlp
from .estimation import AdaptationLayer, layer_forward_loss, layer_gradient
from .losses import (LossSpec, alpha_posterior, batch_objective, mean_loss, smoothed_posterior,
                     verify_gradient_identity)
from .noise import build_asymmetric, build_uniform, corrupt_labels, empirical_transition
from .numerics import make_rng
from .smoothing import (SmoothingConfig, compute_alpha, effective_uniform_rate, linear_gamma_for_rate,
                        smooth_linear, smooth_power, smooth_temperature)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def random_probs(rng, c: int) -> np.ndarray:
    return rng.dirichlet(np.ones(c))


def central_difference(f, params: list[np.ndarray], h: float = 1e-5) -> list[np.ndarray]:
    """Central differences of scalar ``f()`` w.r.t. every entry of ``params`` (perturbed in place)."""
    out = []
    for p in params:
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for k in range(flat.size):
            old = flat[k]
            flat[k] = old + h
            up = f()
            flat[k] = old - h
            down = f()
            flat[k] = old
            gflat[k] = (up - down) / (2 * h)
        out.append(g)
    return out


def max_relative_error(a: list[np.ndarray], b: list[np.ndarray]) -> float:
    worst = 0.0
    for x, y in zip(a, b):
        scale = max(np.max(np.abs(x)), np.max(np.abs(y)), 1e-12)
        worst = max(worst, float(np.max(np.abs(x - y)) / scale))
    return worst


def _timed(name, fn) -> CheckResult:
    t = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashing check is a failing check
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CheckResult(name, passed, detail, time.perf_counter() - t)


def _gradient_identity():
    rng = make_rng(7)
    worst = 0.0
    cases = 0
    for c in (2, 3, 10):
        for eta in (0.2, 0.4, 0.6):
            for _ in range(3 if c != 10 else 2):
                model = mlp.init_mlp([5, 8, c], rng)
                x = rng.standard_normal(5)
                j = int(rng.integers(c))
                T = build_uniform(c, eta) if rng.random() < 0.5 else smooth_power(build_uniform(c, eta), 0.5)
                worst = max(worst, verify_gradient_identity(model, x, j, T))
                cases += 1
    return worst < 1e-8, f"{cases} instances, max relative discrepancy {worst:.2e} (< 1e-8)"


def loss_specs(c: int) -> dict[str, LossSpec]:
    T = build_uniform(c, 0.4)
    A = build_asymmetric(c, 0.3)
    return {
        "ce": LossSpec("ce"),
        "ls": LossSpec("ls", epsilon=0.1),
        "forward": LossSpec("forward", T=T),
        "forward_asym": LossSpec("forward", T=A),
        "forward_ls": LossSpec("forward", T=T, epsilon=0.1),
        "forward_power": LossSpec("forward_smoothed", T=A, smoothing=SmoothingConfig("power", 0.5)),
        "forward_linear": LossSpec("forward_smoothed", T=T, smoothing=SmoothingConfig("linear", 0.8)),
        "forward_temperature": LossSpec("forward_smoothed", T=T, smoothing=SmoothingConfig("temperature", 1.1)),
        "gce": LossSpec("gce", q=0.7),
    }


def _finite_differences():
    rng = make_rng(11)
    c = 3
    worst = {}
    for name, spec in loss_specs(c).items():
        model = mlp.init_mlp([5, 6, c], rng)
        for b in model.biases:  # away from the ReLU kink
            b += rng.uniform(0.05, 0.3, b.shape)
        X = rng.standard_normal((4, 5))
        y = rng.integers(c, size=4)
        _, grads = batch_objective(spec, model, X, y)
        numeric = central_difference(lambda: mean_loss(spec, model, X, y), model.params)
        worst[name] = max_relative_error(grads.params, numeric)
    layer = AdaptationLayer(rng.standard_normal((c, c)))
    P = np.vstack([random_probs(rng, c) for _ in range(6)])
    y = rng.integers(c, size=6)
    numeric = central_difference(lambda: layer_forward_loss(layer.logits, P, y), [layer.logits])
    worst["adaptation_layer"] = max_relative_error([layer_gradient(layer, P, y)], numeric)
    top = max(worst.values())
    return top < 1e-4, f"{len(worst)} objectives, max relative error {top:.2e} (< 1e-4)"


def _smoothing_algebra():
    rng = make_rng(3)
    problems = []
    for c in (2, 3, 5, 10):
        for _ in range(5):
            T = rng.dirichlet(np.ones(c), size=c)
            Z = T.copy()
            Z[rng.random((c, c)) < 0.3] = 0.0
            Z[np.arange(c), np.arange(c)] += 0.1
            Z /= Z.sum(axis=1, keepdims=True)
            for fn, arg, M in ((smooth_power, 1.0, Z), (smooth_linear, 1.0, Z), (smooth_temperature, 1.0, T)):
                if np.max(np.abs(fn(M, arg) - M)) > 1e-12:
                    problems.append(f"{fn.__name__} identity")
            beta = float(rng.uniform(0.05, 1.0))
            S = smooth_power(Z, beta)
            if not np.array_equal(S == 0, Z == 0):
                problems.append("zero preservation")
            for M in (S, smooth_linear(Z, beta), smooth_temperature(T, 1 / beta)):
                if np.any(M < 0) or np.max(np.abs(M.sum(axis=1) - 1)) > 1e-12:
                    problems.append("row-stochastic")
            gamma = float(rng.uniform(1.0, 5.0))
            if np.max(np.abs(smooth_temperature(T, gamma) - smooth_power(T, 1 / gamma))) > 1e-12:
                problems.append("temperature/power equivalence")
            eta = float(rng.uniform(0.05, 0.85 * (1 - 1 / c)))
            U = build_uniform(c, eta)
            Sp = smooth_power(U, beta)
            eff = effective_uniform_rate(Sp)
            Sl = smooth_linear(U, linear_gamma_for_rate(c, eta, eff))
            St = smooth_temperature(U, 1 / beta)
            if max(np.max(np.abs(Sp - Sl)), np.max(np.abs(Sp - St))) > 1e-9:
                problems.append("uniform-noise equivalence")
    ok = not problems
    return ok, "all identities hold" if ok else "violations: " + ", ".join(sorted(set(problems)))


def _alpha():
    rng = make_rng(5)
    worst_end = 0.0
    for c in (2, 3, 5, 10, 100):
        for eta in np.linspace(0.05, 0.95, 19):
            if abs(1 - eta - 1 / c) < 1e-3:
                continue
            worst_end = max(worst_end, abs(compute_alpha(c, eta, 1.0) - 1), abs(compute_alpha(c, eta, 0.0)))
    worst_q = 0.0
    for _ in range(50):
        c = int(rng.choice([2, 3, 10]))
        eta = float(rng.uniform(0.05, 0.9 * (1 - 1 / c)))
        beta = float(rng.uniform(0.05, 1.0))
        p = random_probs(rng, c)
        j = int(rng.integers(c))
        a = alpha_posterior(p, j, eta, beta)
        s = smoothed_posterior(p, j, build_uniform(c, eta), SmoothingConfig("power", beta))
        worst_q = max(worst_q, float(np.max(np.abs(a - s))))
    ok = worst_end < 1e-12 and worst_q < 1e-10
    return ok, f"endpoint error {worst_end:.1e} (< 1e-12), alpha-form vs S-form {worst_q:.1e} (< 1e-10)"


def _noise_statistics():
    rng = make_rng(2024)
    c, n = 10, 100_000
    clean = rng.integers(c, size=n)
    worst = 0.0
    for eta in (0.2, 0.4, 0.6, 0.8):
        T = build_uniform(c, eta)
        emp = empirical_transition(clean, corrupt_labels(clean, T, rng), c)
        worst = max(worst, float(np.max(np.abs(emp - T))))
    return worst < 0.015, f"max entrywise deviation {worst:.4f} over 4 noise rates (< 0.015)"


CHECKS = (
    ("gradient identity", _gradient_identity),
    ("finite differences", _finite_differences),
    ("smoothing algebra", _smoothing_algebra),
    ("alpha endpoints and posterior", _alpha),
    ("noise injection statistics", _noise_statistics),
)


def run_all() -> list[CheckResult]:
    return [_timed(name, fn) for name, fn in CHECKS]
