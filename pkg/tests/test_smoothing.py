import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisylab.noise import build_asymmetric, build_uniform
from noisylab.smoothing import (SmoothingConfig, SmoothingError, compute_alpha,
                                effective_uniform_rate, linear_gamma_for_rate, smooth,
                                smooth_linear, smooth_power, smooth_temperature)

# frozen from an independent math-module evaluation of sqrt(0.6)/(sqrt(0.6)+2*sqrt(0.2))
POWER_ROW = [0.4641016151377546, 0.2679491924311227, 0.2679491924311227]
ALPHA_10_04_05 = 0.3797958971132713


@st.composite
def stochastic_matrices(draw, positive=False):
    c = draw(st.integers(2, 8))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    T = rng.dirichlet(np.ones(c), size=c)
    if not positive:
        T[rng.random((c, c)) < 0.3] = 0.0
        T[np.arange(c), np.arange(c)] += 0.05
        T /= T.sum(axis=1, keepdims=True)
    return T


def test_power_beta_one_is_identity():
    T = build_asymmetric(4, 0.3)
    assert np.array_equal(smooth_power(T, 1.0), T)


def test_power_keeps_identity():
    assert np.array_equal(smooth_power(np.eye(5), 0.3), np.eye(5))


def test_power_hand_value():
    S = smooth_power(build_uniform(3, 0.4), 0.5)
    np.testing.assert_allclose(S[0], POWER_ROW, rtol=1e-12)


@pytest.mark.parametrize("beta", [0.0, -0.5, 1.5])
def test_power_rejects_beta(beta):
    with pytest.raises(SmoothingError):
        smooth_power(np.eye(2), beta)


def test_power_rejects_zero_row():
    with pytest.raises(SmoothingError):
        smooth_power(np.array([[0.0, 0.0], [0.5, 0.5]]), 0.5)


def test_linear_values():
    assert np.array_equal(smooth_linear(build_uniform(3, 0.2), 1.0), build_uniform(3, 0.2))
    np.testing.assert_allclose(smooth_linear(np.eye(2), 0.5), [[0.75, 0.25], [0.25, 0.75]])


def test_linear_fills_zero_entries():
    T = build_asymmetric(4, 0.3)
    S = smooth_linear(T, 0.8)
    assert T[0, 2] == 0
    assert S[0, 2] == pytest.approx(0.2 / 4)
    assert np.all(S > 0)


def test_linear_rejects_gamma():
    with pytest.raises(SmoothingError):
        smooth_linear(np.eye(2), 0.0)


def test_temperature_values():
    T = build_uniform(4, 0.3)
    np.testing.assert_allclose(smooth_temperature(T, 1.0), T, atol=1e-15)
    np.testing.assert_allclose(smooth_temperature(T, 2.0), smooth_power(T, 0.5), atol=1e-12)


def test_temperature_rejects_zero_entries_and_small_gamma():
    with pytest.raises(SmoothingError):
        smooth_temperature(build_asymmetric(3, 0.2), 1.5)
    with pytest.raises(SmoothingError):
        smooth_temperature(build_uniform(3, 0.2), 0.9)


def test_config_validation_and_dispatch():
    T = build_uniform(3, 0.4)
    assert np.array_equal(smooth(T, SmoothingConfig("power", 0.5)), smooth_power(T, 0.5))
    assert np.array_equal(smooth(T, None), T)
    with pytest.raises(SmoothingError):
        SmoothingConfig("power", 2.0)
    with pytest.raises(SmoothingError):
        SmoothingConfig("temperature", 0.5)
    with pytest.raises(SmoothingError):
        SmoothingConfig("cubic", 0.5)


@given(stochastic_matrices(), st.floats(0.01, 1.0))
def test_power_zero_preservation_and_stochasticity(T, beta):
    S = smooth_power(T, beta)
    assert np.array_equal(S == 0, T == 0)
    np.testing.assert_allclose(S.sum(axis=1), 1.0, atol=1e-12)


@given(stochastic_matrices(), st.floats(0.01, 1.0))
def test_power_preserves_row_ordering(T, beta):
    S = smooth_power(T, beta)
    for t_row, s_row in zip(T, S):
        order = np.argsort(t_row, kind="stable")
        assert np.all(np.diff(s_row[order]) >= -1e-15)


@given(stochastic_matrices(positive=True), st.floats(1.0, 20.0))
def test_temperature_equals_power(T, gamma):
    np.testing.assert_allclose(smooth_temperature(T, gamma), smooth_power(T, 1 / gamma), atol=1e-12)


@given(stochastic_matrices(), st.floats(0.01, 1.0))
def test_linear_row_stochastic(T, gamma):
    S = smooth_linear(T, gamma)
    np.testing.assert_allclose(S.sum(axis=1), 1.0, atol=1e-12)
    if gamma < 1:
        assert np.all(S > 0)


@settings(max_examples=60)
@given(st.integers(2, 20), st.floats(0.01, 0.99), st.floats(0.01, 1.0))
def test_three_methods_coincide_on_uniform_noise(c, frac, beta):
    eta = frac * (1 - 1 / c) * 0.95
    T = build_uniform(c, eta)
    Sp = smooth_power(T, beta)
    eff = effective_uniform_rate(Sp)
    assert eff is not None and eta - 1e-12 <= eff <= 1 - 1 / c + 1e-12
    for S in (smooth_linear(T, 0.7), smooth_temperature(T, 1 / beta)):
        assert effective_uniform_rate(S) is not None
    Sl = smooth_linear(T, linear_gamma_for_rate(c, eta, eff))
    St = smooth_temperature(T, 1 / beta)
    assert np.abs(Sp - Sl).max() < 1e-9
    assert np.abs(Sp - St).max() < 1e-9


def test_effective_uniform_rate():
    assert effective_uniform_rate(smooth_power(build_uniform(3, 0.4), 0.5)) == pytest.approx(
        2 * POWER_ROW[1], abs=1e-12)
    assert effective_uniform_rate(np.eye(4)) == 0.0
    assert effective_uniform_rate(build_asymmetric(4, 0.2)) is None


def test_alpha_values():
    assert compute_alpha(10, 0.4, 0.5) == pytest.approx(ALPHA_10_04_05, abs=1e-12)
    for c in (2, 3, 10):
        for eta in (0.1, 0.3, 0.45):
            assert compute_alpha(c, eta, 1.0) == pytest.approx(1.0, abs=1e-12)
            assert compute_alpha(c, eta, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_alpha_singular_rate():
    with pytest.raises(SmoothingError):
        compute_alpha(10, 0.9, 0.5)
    with pytest.raises(SmoothingError):
        compute_alpha(2, 0.5, 0.5)


@pytest.mark.parametrize("c", [2, 3, 10, 100])
@pytest.mark.parametrize("eta", [0.05, 0.2, 0.4])
def test_alpha_in_unit_interval_and_continuous(c, eta):
    if eta >= 1 - 1 / c:
        pytest.skip("above the singular rate")
    betas = np.linspace(0, 1, 1001)
    alphas = np.array([compute_alpha(c, eta, b) for b in betas])
    assert np.all(alphas >= -1e-12) and np.all(alphas <= 1 + 1e-12)
    assert np.abs(np.diff(alphas)).max() < 0.01


def test_alpha_matches_linear_decomposition():
    c, eta, beta = 6, 0.35, 0.4
    T = build_uniform(c, eta)
    a = compute_alpha(c, eta, beta)
    np.testing.assert_allclose(smooth_power(T, beta), a * T + (1 - a) / c, atol=1e-12)
