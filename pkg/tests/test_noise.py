import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisylab.noise import (NoiseError, NoiseSpec, build_asymmetric, build_uniform, check_transition,
                            corrupt_labels, empirical_transition, read_transition_csv,
                            write_transition_csv)
from noisylab.numerics import make_rng


def test_uniform_cifar_like():
    T = build_uniform(10, 0.4)
    np.testing.assert_allclose(np.diag(T), 0.6)
    off = T[~np.eye(10, dtype=bool)]
    np.testing.assert_allclose(off, 0.4 / 9)


def test_uniform_zero_rate_is_identity():
    assert np.array_equal(build_uniform(4, 0.0), np.eye(4))


def test_uniform_three_classes():
    np.testing.assert_allclose(build_uniform(3, 0.4),
                               [[0.6, 0.2, 0.2], [0.2, 0.6, 0.2], [0.2, 0.2, 0.6]])


@pytest.mark.parametrize("c,eta", [(1, 0.1), (3, 1.0), (3, -0.1)])
def test_uniform_rejects(c, eta):
    with pytest.raises(NoiseError):
        build_uniform(c, eta)


@given(st.integers(2, 30), st.floats(0, 0.999))
def test_constructors_are_row_stochastic(c, eta):
    for T in (build_uniform(c, eta), build_asymmetric(c, eta)):
        check_transition(T)
        assert np.all(T >= 0)


def test_asymmetric_cycle():
    T = build_asymmetric(3, 0.3, lambda i: (i + 1) % 3)
    np.testing.assert_allclose(T[0], [0.7, 0.3, 0.0])
    np.testing.assert_allclose(T[2], [0.3, 0.0, 0.7])
    np.testing.assert_allclose(T.sum(axis=1), 1.0)
    assert np.array_equal(build_asymmetric(3, 0.0), np.eye(3))


def test_asymmetric_rejects_fixed_point():
    with pytest.raises(NoiseError):
        build_asymmetric(3, 0.2, lambda i: i)


def test_noise_spec():
    assert np.array_equal(NoiseSpec("uniform", 0.2, 4).transition(), build_uniform(4, 0.2))
    pairs = [2, 0, 1]
    np.testing.assert_allclose(NoiseSpec("asymmetric", 0.2, 3, lambda i: pairs[i]).transition()[0],
                               [0.8, 0.0, 0.2])
    with pytest.raises(NoiseError):
        NoiseSpec("uniform", 1.0, 3)


def test_identity_matrix_keeps_labels():
    y = make_rng(0).integers(5, size=1000)
    assert np.array_equal(corrupt_labels(y, np.eye(5), make_rng(1)), y)


def test_corruption_is_deterministic():
    y = make_rng(0).integers(10, size=5000)
    T = build_uniform(10, 0.4)
    assert np.array_equal(corrupt_labels(y, T, make_rng(7)), corrupt_labels(y, T, make_rng(7)))


def test_corruption_never_draws_zero_probability_labels():
    y = make_rng(0).integers(4, size=20000)
    T = build_asymmetric(4, 0.45)
    noisy = corrupt_labels(y, T, make_rng(2))
    assert np.all(T[y, noisy] > 0)


def test_corruption_rejects_bad_labels():
    with pytest.raises(NoiseError):
        corrupt_labels([0, 3], build_uniform(3, 0.1), make_rng(0))


@pytest.mark.parametrize("eta", [0.2, 0.4, 0.6, 0.8])
def test_flip_fraction_within_three_sigma(eta):
    n = 100_000
    y = make_rng(0).integers(10, size=n)
    noisy = corrupt_labels(y, build_uniform(10, eta), make_rng(1))
    frac = np.mean(noisy != y)
    assert abs(frac - eta) <= 3 * np.sqrt(eta * (1 - eta) / n)


@pytest.mark.parametrize("eta", [0.2, 0.4, 0.6, 0.8])
def test_empirical_matches_true_matrix(eta):
    y = make_rng(3).integers(10, size=100_000)
    T = build_uniform(10, eta)
    emp = empirical_transition(y, corrupt_labels(y, T, make_rng(4)), 10)
    assert np.abs(emp - T).max() < 0.015


def test_empirical_transition_edge_cases():
    y = np.array([0, 1, 2, 2])
    assert np.array_equal(empirical_transition(y, y, 3), np.eye(3))
    emp = empirical_transition([0, 1], [1, 0], 3)
    np.testing.assert_allclose(emp, [[0, 1, 0], [1, 0, 0], [1 / 3, 1 / 3, 1 / 3]])
    with pytest.raises(NoiseError):
        empirical_transition([0, 1], [0], 2)


def test_check_transition_rejects():
    with pytest.raises(NoiseError):
        check_transition([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(NoiseError):
        check_transition([[1.0, 0.0, 0.0]])
    with pytest.raises(NoiseError):
        check_transition([[1.5, -0.5], [0.0, 1.0]])


def test_csv_round_trip(tmp_path):
    T = build_uniform(7, 0.37)
    path = tmp_path / "T.csv"
    write_transition_csv(T, path)
    text = path.read_text()
    assert text.count("\n") == 7 and all(len(row.split(",")) == 7 for row in text.splitlines())
    assert np.array_equal(read_transition_csv(path), T)
    path.write_text("0.5,0.4\n0.5,0.5\n")
    with pytest.raises(NoiseError):
        read_transition_csv(path)
