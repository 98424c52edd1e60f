import csv

import numpy as np
import pytest

from noisylab import model as mlp
from noisylab.config import ConfigError, ExperimentConfig, parse_config, parse_grid
from noisylab.data import DataError, NoisyDataset, load_csv_dataset, make_synthetic_dataset
from noisylab.harness import (RunRecord, aggregate, emit_outputs, estimate_from_warm_model,
                              prepare_data, run_experiment, run_single, select_hyperparameter,
                              selection_split, validation_score)
from noisylab.numerics import make_rng, spawn_rngs

SMALL = dict(classes=3, n_per_class=60, test_per_class=20, dim=5, separation=3.0,
             hidden=(16,), epochs=4, milestones=(3,), lr=0.05, batch_size=32)


def small(**kw):
    return ExperimentConfig(**{**SMALL, **kw})


def test_parse_config_types_and_echo_round_trip():
    cfg = parse_config("""
        # comment
        method = fd
        smoothing = power
        smoothing_param = 0.5   # beta
        hidden = 32,16
        seeds = 0,1,2
        eta = 0.4
    """)
    assert cfg.method == "fd" and cfg.smoothing_param == 0.5
    assert cfg.hidden == (32, 16) and cfg.seeds == (0, 1, 2)
    assert cfg.method_label == "FD+MS"
    assert parse_config(cfg.echo()) == cfg


@pytest.mark.parametrize("text", ["bogus = 1", "method = nope", "eta = 1.5", "epochs = x",
                                  "method = ce\nsmoothing = power", "method = ce\nmethod = fd",
                                  "just words", "dataset_file = /does/not/exist.csv"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_method_labels():
    assert small(method="fd", label_smoothing=0.1).method_label == "FD+LS"
    assert small(method="al", smoothing="power").method_label == "AL+MS"
    assert small(method="fd", smoothing="linear").method_label == "FD+L"
    assert small(method="fd_est", smoothing="temperature").method_label == "FD_est+T"
    assert small(label="mine").method_label == "mine"


def test_grid_cells():
    grid = parse_grid("""
        eta = 0.2 | 0.4
        + CE: method=ce
        + FD+MS: method=fd smoothing=power smoothing_param=0.5
    """)
    cells = grid.cells(small())
    assert [(c.method_label, c.eta) for c in cells] == [
        ("CE", 0.2), ("CE", 0.4), ("FD+MS", 0.2), ("FD+MS", 0.4)]
    with pytest.raises(ConfigError):
        parse_grid("nope = 1 | 2")
    with pytest.raises(ConfigError):
        parse_grid("+ X: nope=1")


def test_synthetic_dataset():
    a = make_synthetic_dataset(4, 30, 6, 2.0, make_rng(1))
    b = make_synthetic_dataset(4, 30, 6, 2.0, make_rng(1))
    assert a.X.tobytes() == b.X.tobytes() and np.array_equal(a.clean, b.clean)
    assert np.array_equal(np.bincount(a.clean), [30] * 4)
    assert a.noisy is None
    with pytest.raises(DataError):
        make_synthetic_dataset(4, 0, 6, 2.0, make_rng(1))
    with pytest.raises(DataError):
        make_synthetic_dataset(1, 5, 6, 2.0, make_rng(1))
    low_dim = make_synthetic_dataset(6, 5, 2, 2.0, make_rng(1))
    assert low_dim.X.shape == (30, 2)


def test_well_separated_blobs_are_linearly_learnable():
    cfg = small(classes=5, separation=12.0, hidden=(), noise="none", epochs=10, milestones=())
    rec = run_single(cfg, 0)
    assert rec.last_accuracy > 99.0


def test_test_labels_are_never_corrupted():
    cfg = small(eta=0.6, n_per_class=500, test_per_class=500)
    data = prepare_data(cfg, make_rng(0))
    assert data.test.noisy is None
    from noisylab.harness import clean_datasets
    _, clean_test = clean_datasets(cfg)
    assert np.array_equal(data.test.clean, clean_test.clean)
    flip = np.mean(data.train.noisy != data.train.clean)
    assert abs(flip - 0.6) < 0.05


def test_selection_scores_against_noisy_labels():
    cfg = small(method="fd", eta=0.5)
    sub, val = selection_split(cfg, 0)
    assert val.noisy is not None and np.any(val.noisy != val.clean)
    assert len(sub) + len(val) == 3 * 60
    # sentinel: a constant predictor scores 100% on noisy labels all equal to its guess
    m = mlp.zeros_like_model([5, 3])
    sentinel = NoisyDataset(val.X, np.full(len(val), 1), np.full(len(val), 0))
    assert validation_score(m, sentinel) == 100.0


def test_select_hyperparameter():
    cfg = small(method="fd", seeds=(0,))
    assert select_hyperparameter(cfg, [1.0])[0] == 1.0
    with pytest.raises(Exception):
        select_hyperparameter(cfg, [])
    with pytest.raises(Exception):
        select_hyperparameter(small(method="ce"), [0.5, 1.0])
    best, scores = select_hyperparameter(cfg, [0.5, 1.0])
    again = select_hyperparameter(cfg, [0.5, 1.0])
    assert (best, scores) == again
    assert best == max(scores, key=lambda b: (scores[b], -b))


def test_ce_equals_forward_with_identity_on_clean_data():
    a = run_single(small(method="ce", noise="none"), 3)
    b = run_single(small(method="fd", noise="none"), 3)
    assert a.accuracy == b.accuracy and a.loss == b.loss


def test_runs_are_reproducible():
    a = run_single(small(method="fd", smoothing="power", smoothing_param=0.5), 1)
    b = run_single(small(method="fd", smoothing="power", smoothing_param=0.5), 1)
    assert a.accuracy == b.accuracy and a.loss == b.loss


def test_every_method_runs():
    for kw in [dict(method="ls", label_smoothing=0.1), dict(method="gce"), dict(method="fd_est"),
               dict(method="fd_est", smoothing="power", smoothing_param=0.1),
               dict(method="al", al_warmup=2), dict(method="al", smoothing="power", al_warmup=1),
               dict(method="fd", noise="asymmetric", smoothing="linear", smoothing_param=0.8)]:
        rec = run_single(small(**kw), 0)
        assert len(rec.accuracy) == 4 and all(0 <= a <= 100 for a in rec.accuracy)
        assert rec.lr == [0.05, 0.05, 0.05, 0.005]
    rec = run_single(small(method="al", al_warmup=2), 0)
    assert len(rec.diag) == 4 and rec.matrix.shape == (3, 3)


def test_temperature_on_asymmetric_noise_fails_cleanly(tmp_path):
    cfg = small(method="fd", noise="asymmetric", smoothing="temperature", smoothing_param=1.1, seeds=(0, 1))
    records, rows = run_experiment(cfg, tmp_path)
    assert all(not r.ok for r in records) and rows == []
    assert (tmp_path / "failures.csv").exists()
    assert (tmp_path / "summary.csv").read_text().count("\n") == 1


def test_perfect_sample_estimate_on_blobs():
    cfg = ExperimentConfig(eta=0.4, epochs=20, milestones=(10, 17), estimator_percentile=97)
    noise_rng, _, _, rng = spawn_rngs(0, 4)
    data = prepare_data(cfg, noise_rng)
    T = estimate_from_warm_model(cfg, [20, 128, 128, 10], data.train, rng)
    assert abs(np.diag(T).mean() - 0.6) < 0.1


def _fake(label, eta, seed, acc):
    r = RunRecord(f"{label}_eta{eta}_seed{seed}", label, eta, seed)
    for a in acc:
        r.log_epoch(a, 1.0, 0.1)
    return r


def test_aggregate_mean_and_sample_std():
    recs = [_fake("FD", 0.4, s, [50.0, a]) for s, a in enumerate([60.0, 62.0, 64.0, 66.0, 68.0])]
    (row,) = aggregate(recs)
    assert row["last_mean"] == 64.0
    assert row["last_std"] == pytest.approx(np.std([60, 62, 64, 66, 68], ddof=1))
    assert row["best_mean"] == 64.0 and row["n_seeds"] == 5


def test_emit_outputs_grid_and_empty(tmp_path):
    recs = [_fake(m, eta, s, [10.0 * s + eta])
            for m in ("CE", "FD", "FD+MS") for eta in (0.2, 0.4, 0.6, 0.8) for s in range(5)]
    emit_outputs(recs, tmp_path / "full")
    rows = list(csv.DictReader(open(tmp_path / "full" / "summary.csv")))
    assert len(rows) == 12
    emit_outputs([], tmp_path / "empty")
    assert (tmp_path / "empty" / "summary.csv").read_text() == \
        "method,eta,n_seeds,last_mean,last_std,best_mean,best_std\n"


def test_summary_agrees_with_curves(tmp_path):
    cfg = small(method="fd", seeds=(0, 1, 2))
    run_experiment(cfg, tmp_path)
    (row,) = list(csv.DictReader(open(tmp_path / "summary.csv")))
    last = []
    for seed in (0, 1, 2):
        curve = list(csv.DictReader(open(tmp_path / f"curves_FD_eta0.4_seed{seed}.csv")))
        assert [int(r["epoch"]) for r in curve] == [0, 1, 2, 3]
        last.append(float(curve[-1]["accuracy"]))
    assert float(row["last_mean"]) == pytest.approx(np.mean(last), abs=1e-12)
    assert float(row["last_std"]) == pytest.approx(np.std(last, ddof=1), abs=1e-12)
    assert parse_config((tmp_path / "config.echo").read_text()) == cfg


def test_outputs_are_byte_identical(tmp_path):
    cfg = small(method="al", smoothing="power", smoothing_param=0.8, al_warmup=1, seeds=(4,))
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "diag_AL-MS_eta0.4_seed4.csv" in files and "matrix_AL-MS_eta0.4_seed4.csv" in files
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    text = (tmp_path / "a" / "curves_AL-MS_eta0.4_seed4.csv").read_bytes()
    assert b"\r" not in text


def test_csv_dataset(tmp_path):
    ds = make_synthetic_dataset(3, 40, 4, 3.0, make_rng(0))
    path = tmp_path / "data.csv"
    lines = ["f0,f1,f2,f3,label"] + [",".join(map(repr, x)) + f",{y}" for x, y in zip(ds.X.tolist(), ds.clean)]
    path.write_text("\n".join(lines) + "\n")
    loaded = load_csv_dataset(path)
    assert np.array_equal(loaded.X, ds.X) and np.array_equal(loaded.clean, ds.clean)
    rec = run_single(small(dataset_file=str(path), dim=4, test_fraction=0.25), 0)
    assert len(rec.accuracy) == 4
    path.write_text("1.0,2.0,0.5\n")
    with pytest.raises(DataError):
        load_csv_dataset(path)
    with pytest.raises(DataError):
        load_csv_dataset(tmp_path / "missing.csv")


def test_selected_beta_retrains_at_least_as_well_as_unsmoothed():
    cfg = ExperimentConfig(method="fd", eta=0.4, n_per_class=300, epochs=20, milestones=(10, 17), seeds=(0,))
    best, _ = select_hyperparameter(cfg, [0.5, 1.0])
    acc = {}
    for beta in {best, 1.0}:
        _, (row,) = run_experiment(cfg.replace(smoothing="power", smoothing_param=beta, seeds=(0, 1, 2)))
        acc[beta] = row["last_mean"]
    assert acc[best] >= acc[1.0]
