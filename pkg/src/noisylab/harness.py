"""Experiment runner: data, noise, training loops, selection and CSV output."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import model as mlp
from .config import ExperimentConfig
from .data import NoisyDataset, load_csv_dataset, make_synthetic_dataset, train_test_split
from .estimation import AlSchedule, al_init_identity, al_train_step, estimate_perfect_samples
from .losses import LossSpec, batch_objective
from .noise import NoiseSpec, write_transition_csv
from .numerics import spawn_rngs
from .smoothing import SmoothingConfig

log = logging.getLogger(__name__)


class HarnessError(RuntimeError):
    pass


@dataclass
class RunData:
    train: NoisyDataset  # noisy labels filled in
    test: NoisyDataset  # clean labels only
    T: np.ndarray


@dataclass
class RunRecord:
    run_id: str
    label: str
    eta: float
    seed: int
    accuracy: list[float] = field(default_factory=list)
    loss: list[float] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    diag: list[np.ndarray] | None = None
    matrix: np.ndarray | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def last_accuracy(self) -> float:
        return self.accuracy[-1]

    @property
    def best_accuracy(self) -> float:
        return max(self.accuracy)

    def log_epoch(self, acc: float, loss: float, lr: float) -> None:
        if not 0 <= acc <= 100:
            raise HarnessError(f"accuracy {acc} outside [0, 100]")
        self.accuracy.append(acc)
        self.loss.append(loss)
        self.lr.append(lr)


def _noise_spec(cfg: ExperimentConfig, c: int) -> NoiseSpec:
    if cfg.noise == "none":
        return NoiseSpec("uniform", 0.0, c)
    pair_map = None
    if cfg.pair_map:
        if len(cfg.pair_map) != c:
            raise HarnessError(f"pair_map lists {len(cfg.pair_map)} targets for {c} classes")
        targets = cfg.pair_map
        pair_map = lambda i: targets[i]  # noqa: E731
    return NoiseSpec(cfg.noise, cfg.eta, c, pair_map)


def clean_datasets(cfg: ExperimentConfig) -> tuple[NoisyDataset, NoisyDataset]:
    """Train/test datasets with clean labels only; depends on ``data_seed`` alone."""
    rng_train, rng_test = spawn_rngs(cfg.data_seed, 2)
    if cfg.dataset_file:
        full = load_csv_dataset(cfg.dataset_file)
        if full.clean.max() >= cfg.classes:
            raise HarnessError(f"dataset has label {full.clean.max()} but classes = {cfg.classes}")
        return train_test_split(full, cfg.test_fraction, rng_train)
    train = make_synthetic_dataset(cfg.classes, cfg.n_per_class, cfg.dim, cfg.separation,
                                   rng_train, cfg.cluster_std)
    test = make_synthetic_dataset(cfg.classes, cfg.test_per_class, cfg.dim, cfg.separation,
                                  rng_test, cfg.cluster_std)
    return train, test


def prepare_data(cfg: ExperimentConfig, rng: np.random.Generator) -> RunData:
    """Corrupt the training labels; the test set keeps its clean labels."""
    train, test = clean_datasets(cfg)
    spec = _noise_spec(cfg, cfg.classes)
    return RunData(train.with_noise(spec, rng), test, spec.transition())


def _smoothing(cfg: ExperimentConfig) -> SmoothingConfig | None:
    return None if cfg.smoothing == "none" else SmoothingConfig(cfg.smoothing, cfg.smoothing_param)


def _optimizer(cfg: ExperimentConfig) -> mlp.OptimizerState:
    return mlp.OptimizerState(cfg.lr, cfg.momentum, cfg.weight_decay, cfg.milestones)


def _layer_dims(cfg: ExperimentConfig, dim: int) -> list[int]:
    return [dim, *cfg.hidden, cfg.classes]


def train_classifier(model: mlp.MlpModel, spec: LossSpec, X, y, cfg: ExperimentConfig,
                     rng: np.random.Generator, record: RunRecord | None = None,
                     X_test=None, y_test=None) -> mlp.MlpModel:
    """Minibatch SGD on the batch-mean of ``spec``; logs one row per epoch if ``record`` is given."""
    opt = _optimizer(cfg)
    n = X.shape[0]
    for epoch in range(cfg.epochs):
        lr = opt.lr(epoch)
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = batch_objective(spec, model, X[idx], y[idx])
            mlp.sgd_step(model, opt, grads, lr)
            total += loss * idx.shape[0]
        if record is not None:
            record.log_epoch(mlp.accuracy(model, X_test, y_test), total / n, lr)
    return model


def train_adaptation(model: mlp.MlpModel, data: RunData, cfg: ExperimentConfig,
                     rng: np.random.Generator, record: RunRecord):
    layer = al_init_identity(cfg.classes, cfg.al_jitter, rng, cfg.al_kappa)
    schedule = AlSchedule(cfg.al_warmup, cfg.matrix_lr, cfg.momentum)
    smoothing = _smoothing(cfg)
    opt = _optimizer(cfg)
    X, y = data.train.X, data.train.noisy
    n = X.shape[0]
    record.diag = []
    for epoch in range(cfg.epochs):
        lr = opt.lr(epoch)
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, _, loss = al_train_step(model, opt, layer, X[idx], y[idx], epoch, schedule, smoothing, lr)
            total += loss * idx.shape[0]
        record.log_epoch(mlp.accuracy(model, data.test.X, data.test.clean), total / n, lr)
        record.diag.append(np.diag(layer.matrix).copy())
    record.matrix = layer.matrix
    return model, layer


def estimate_from_warm_model(cfg: ExperimentConfig, dims, train: NoisyDataset,
                             rng: np.random.Generator) -> np.ndarray:
    """Train a CE model on the noisy labels, then read T off its most confident samples."""
    warm = mlp.init_mlp(dims, rng)
    train_classifier(warm, LossSpec("ce"), train.X, train.noisy, cfg, rng)
    pct = None if cfg.estimator_percentile >= 100 else cfg.estimator_percentile
    return estimate_perfect_samples(warm, train.X, percentile=pct)


def loss_spec_for(cfg: ExperimentConfig, T: np.ndarray | None) -> LossSpec:
    smoothing = _smoothing(cfg)
    if cfg.method == "ce":
        return LossSpec("ce")
    if cfg.method == "ls":
        return LossSpec("ls", epsilon=cfg.label_smoothing)
    if cfg.method == "gce":
        return LossSpec("gce", q=cfg.gce_q)
    kind = "forward" if smoothing is None else "forward_smoothed"
    return LossSpec(kind, epsilon=cfg.label_smoothing, T=T, smoothing=smoothing)


def run_id(cfg: ExperimentConfig, seed: int) -> str:
    safe = cfg.method_label.replace("+", "-").replace(" ", "_").replace("/", "_")
    return f"{safe}_eta{cfg.eta:g}_seed{seed}"


def run_single(cfg: ExperimentConfig, seed: int) -> RunRecord:
    """One seed of one configuration. Deterministic given (cfg, seed)."""
    record = RunRecord(run_id(cfg, seed), cfg.method_label, cfg.eta, seed)
    noise_rng, init_rng, train_rng, extra_rng = spawn_rngs(seed, 4)
    data = prepare_data(cfg, noise_rng)
    dims = _layer_dims(cfg, data.train.X.shape[1])
    model = mlp.init_mlp(dims, init_rng)
    Xt, yt = data.test.X, data.test.clean
    if cfg.method == "al":
        train_adaptation(model, data, cfg, train_rng, record)
        return record
    T = None
    if cfg.method == "fd":
        T = data.T
    elif cfg.method == "fd_est":
        T = estimate_from_warm_model(cfg, dims, data.train, extra_rng)
        record.matrix = T
    spec = loss_spec_for(cfg, T)
    train_classifier(model, spec, data.train.X, data.train.noisy, cfg, train_rng, record, Xt, yt)
    return record


def aggregate(records: list[RunRecord]) -> list[dict]:
    """Mean and sample std of last/best accuracy per (label, eta), in first-seen order."""
    groups: dict[tuple[str, float], list[RunRecord]] = {}
    for r in records:
        if r.ok:
            groups.setdefault((r.label, r.eta), []).append(r)
    rows = []
    for (label, eta), rs in groups.items():
        last = np.array([r.last_accuracy for r in rs])
        best = np.array([r.best_accuracy for r in rs])
        ddof = 1 if len(rs) > 1 else 0
        rows.append({
            "method": label, "eta": eta, "n_seeds": len(rs),
            "last_mean": float(last.mean()), "last_std": float(last.std(ddof=ddof)),
            "best_mean": float(best.mean()), "best_std": float(best.std(ddof=ddof)),
        })
    return rows


def run_experiment(cfg: ExperimentConfig, output_dir=None, seeds=None):
    """Run every seed; failures are logged and kept as records with ``error`` set."""
    records = []
    for seed in (cfg.seeds if seeds is None else seeds):
        try:
            records.append(run_single(cfg, seed))
        except Exception as exc:  # one bad seed must not sink the sweep
            log.error("run %s failed: %s", run_id(cfg, seed), exc)
            records.append(RunRecord(run_id(cfg, seed), cfg.method_label, cfg.eta, seed, error=str(exc)))
    if output_dir is not None:
        emit_outputs(records, output_dir, cfg)
    return records, aggregate(records)


def run_sweep(cells: list[ExperimentConfig], output_dir=None):
    records = []
    for cell in cells:
        recs, _ = run_experiment(cell)
        records.extend(recs)
    if output_dir is not None:
        emit_outputs(records, output_dir, cells[0] if cells else None, cells)
    return records, aggregate(records)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise HarnessError(f"cannot write {path}: {exc}") from exc


SUMMARY_HEADER = ["method", "eta", "n_seeds", "last_mean", "last_std", "best_mean", "best_std"]


def emit_outputs(records: list[RunRecord], directory, cfg: ExperimentConfig | None = None,
                 cells: list[ExperimentConfig] | None = None) -> list[Path]:
    """Write ``summary.csv``, per-run curves/diagonal/matrix files, and ``config.echo``."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise HarnessError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    summary = out / "summary.csv"
    _write_csv(summary, SUMMARY_HEADER, [[r[k] for k in SUMMARY_HEADER] for r in aggregate(records)])
    written.append(summary)
    failures = [[r.run_id, r.error] for r in records if not r.ok]
    if failures:
        path = out / "failures.csv"
        _write_csv(path, ["run", "error"], [[rid, err.replace(",", ";").replace("\n", " ")]
                                              for rid, err in failures])
        written.append(path)
    for r in records:
        if not r.ok:
            continue
        path = out / f"curves_{r.run_id}.csv"
        _write_csv(path, ["epoch", "accuracy", "loss", "lr"],
                   [[e, a, l, lr] for e, (a, l, lr) in enumerate(zip(r.accuracy, r.loss, r.lr))])
        written.append(path)
        if r.diag is not None:
            c = len(r.diag[0]) if r.diag else 0
            path = out / f"diag_{r.run_id}.csv"
            _write_csv(path, ["epoch"] + [f"d_{i}" for i in range(c)],
                       [[e, *map(float, d)] for e, d in enumerate(r.diag)])
            written.append(path)
        if r.matrix is not None:
            path = out / f"matrix_{r.run_id}.csv"
            write_transition_csv(r.matrix, path)
            written.append(path)
    if cfg is not None:
        path = out / "config.echo"
        text = cfg.echo() if not cells else "\n".join(
            f"# cell {k}\n{c.echo()}" for k, c in enumerate(cells))
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


def select_hyperparameter(cfg: ExperimentConfig, candidates) -> tuple[float, dict[float, float]]:
    """Pick the power-smoothing beta with the best accuracy on a NOISY validation split.

    For each seed, the corrupted training set is split into sub-train and
    validation parts; models are trained on sub-train and scored against the
    validation part's noisy labels. Scores are averaged over ``cfg.seeds``;
    ties go to the smaller beta. Retraining on the full set is left to the caller.
    """
    betas = sorted(float(b) for b in candidates)
    if not betas:
        raise HarnessError("no candidate betas")
    if cfg.method not in ("fd", "fd_est", "al"):
        raise HarnessError(f"beta selection needs a transition-matrix method, not {cfg.method!r}")
    scores = {}
    for beta in betas:
        cell = cfg.replace(smoothing="power", smoothing_param=beta)
        accs = []
        for seed in cfg.seeds:
            sub, val = selection_split(cell, seed)
            rec = run_on_split(cell, seed, sub, val)
            accs.append(rec)
        scores[beta] = float(np.mean(accs))
    best = max(betas, key=lambda b: (scores[b], -b))
    return best, scores


def selection_split(cfg: ExperimentConfig, seed: int) -> tuple[NoisyDataset, NoisyDataset]:
    """(sub-train, validation) parts of the corrupted training set."""
    noise_rng, _, _, split_rng = spawn_rngs(seed, 4)
    data = prepare_data(cfg, noise_rng)
    order = split_rng.permutation(len(data.train))
    n_val = int(round(cfg.val_fraction * len(data.train)))
    if n_val == 0 or n_val == len(data.train):
        raise HarnessError("val_fraction leaves an empty split")
    return data.train.subset(order[n_val:]), data.train.subset(order[:n_val])


def validation_score(model: mlp.MlpModel, val: NoisyDataset) -> float:
    """Accuracy against the validation split's corrupted labels."""
    if val.noisy is None:
        raise HarnessError("validation split has no noisy labels")
    return mlp.accuracy(model, val.X, val.noisy)


def run_on_split(cfg: ExperimentConfig, seed: int, sub: NoisyDataset, val: NoisyDataset) -> float:
    _, init_rng, train_rng, extra_rng = spawn_rngs(seed, 4)
    dims = _layer_dims(cfg, sub.X.shape[1])
    model = mlp.init_mlp(dims, init_rng)
    T = _noise_spec(cfg, cfg.classes).transition()
    if cfg.method == "al":
        rec = RunRecord("select", cfg.method_label, cfg.eta, seed)
        train_adaptation(model, RunData(sub, val, T), cfg, train_rng, rec)
    else:
        if cfg.method == "fd_est":
            T = estimate_from_warm_model(cfg, dims, sub, extra_rng)
        train_classifier(model, loss_spec_for(cfg, T), sub.X, sub.noisy, cfg, train_rng)
    return validation_score(model, val)
