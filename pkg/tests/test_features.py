import numpy as np
import pytest
from scipy import stats

from app.core.exceptions import FeatureError
from app.features import (
    WindowBuffer,
    dump_features,
    extract,
    feature_stream,
    hamming_weights,
    spectral_energy,
    time_domain_features,
)
from app.schemas.detector import FeatureKind


def _window(values):
    return WindowBuffer(len(values), values)


def _direct_dft_energy(frame):
    n = len(frame)
    energies = []
    for k in range(n // 2 + 1):
        acc = sum(frame[j] * np.exp(-2j * np.pi * k * j / n) for j in range(n))
        energies.append(abs(acc) ** 2)
    return np.array(energies)


# ===== WindowBuffer =====

def test_window_prefills_with_zeros():
    window = WindowBuffer(5)
    window.push(3.0)
    window.push(4.0)
    np.testing.assert_array_equal(window.as_array(), [0, 0, 0, 3, 4])
    assert not window.is_full


def test_window_drops_oldest():
    window = WindowBuffer(3, [1, 2, 3, 4])
    np.testing.assert_array_equal(window.as_array(), [2, 3, 4])
    assert window.is_full


def test_window_rejects_zero_capacity():
    with pytest.raises(FeatureError):
        WindowBuffer(0)


# ===== hamming_weights =====

def test_hamming_values():
    weights = hamming_weights(5)
    assert weights[0] == pytest.approx(0.08)
    assert weights[2] == pytest.approx(1.0)
    assert weights[1] == weights[3]


def test_hamming_needs_two_points():
    with pytest.raises(FeatureError):
        hamming_weights(1)


# ===== spectral_energy =====

def test_all_zero_window_has_zero_energy():
    energy = spectral_energy(WindowBuffer(8)).values
    assert energy.shape == (5,)
    assert np.all(energy == 0)


def test_spectral_matches_direct_dft(rng):
    samples = rng.normal(size=7)
    energy = spectral_energy(_window(samples)).values
    expected = _direct_dft_energy(samples * hamming_weights(7))
    np.testing.assert_allclose(energy, expected, rtol=1e-9, atol=1e-12)


def test_spectral_constant_window_dc_bin():
    energy = spectral_energy(_window([1.0] * 5)).values
    assert energy[0] == pytest.approx(hamming_weights(5).sum() ** 2)


def test_spectral_energy_non_negative(rng):
    for _ in range(50):
        assert np.all(spectral_energy(_window(rng.normal(size=5))).values >= 0)


def test_spectral_amplitude_scaling(rng):
    samples = rng.normal(size=5)
    base = spectral_energy(_window(samples)).values
    scaled = spectral_energy(_window(3.5 * samples)).values
    np.testing.assert_allclose(scaled, 3.5 ** 2 * base, rtol=1e-12, atol=1e-12 * base.max())


def test_parseval(rng):
    samples = rng.normal(size=8)
    frame = samples * hamming_weights(8)
    energy = spectral_energy(_window(samples)).values
    # One-sided bins: interior bins stand for a conjugate pair
    total = energy[0] + energy[-1] + 2 * energy[1:-1].sum()
    assert total / 8 == pytest.approx(np.sum(frame ** 2), rel=1e-9)


def test_bin_pure_sinusoid_concentrates():
    n, k = 16, 3
    samples = np.cos(2 * np.pi * k * np.arange(n) / n)
    energy = spectral_energy(_window(samples)).values
    assert int(np.argmax(energy)) == k


def test_push_then_pop_restores_features(rng):
    window = WindowBuffer(5, rng.normal(size=3))
    before = spectral_energy(window).values
    window.push(42.0)
    window.pop_latest()
    np.testing.assert_array_equal(spectral_energy(window).values, before)


def test_spectral_rejects_non_finite():
    with pytest.raises(FeatureError):
        spectral_energy(_window([1.0, float("nan"), 2.0]))


# ===== time_domain_features =====

def test_constant_window_is_degenerate():
    np.testing.assert_array_equal(time_domain_features(_window([2.5] * 6)).values, np.zeros(5))


def test_alternating_autocorrelation():
    samples = [1, -1, 1, -1, 1, -1, 1, -1]
    values = time_domain_features(_window(samples)).values
    assert values[0] == pytest.approx(-1.0, abs=1e-12)


def test_time_domain_matches_direct_statistics(rng):
    x = rng.normal(size=10)
    values = time_domain_features(_window(x)).values
    c = x - x.mean()
    m2 = np.mean(c ** 2)
    assert values[0] == pytest.approx(np.corrcoef(x[:-1], x[1:])[0, 1], abs=1e-12)
    assert values[1] == pytest.approx(np.var(x, ddof=1), rel=1e-12)
    assert values[2] == pytest.approx(stats.skew(x), rel=1e-10)
    assert values[3] == pytest.approx(np.mean(c ** 4) / m2 ** 2, rel=1e-10)
    assert values[4] == pytest.approx(np.mean(c[2:] * c[1:-1] * c[:-2]) / m2 ** 1.5, rel=1e-10)


def test_time_domain_shift_invariant(rng):
    x = rng.normal(size=9)
    base = time_domain_features(_window(x)).values
    shifted = time_domain_features(_window(x + 7.0)).values
    np.testing.assert_allclose(shifted, base, rtol=1e-10, atol=1e-10)


def test_time_domain_needs_four_samples():
    with pytest.raises(FeatureError):
        time_domain_features(_window([1.0, 2.0, 3.0]))


# ===== streams =====

def test_feature_stream_shape():
    matrix = feature_stream(np.arange(20.0), 5, FeatureKind.SPECTRAL_ENERGY)
    assert matrix.shape == (20, 3)
    np.testing.assert_array_equal(matrix[-1], extract(_window(np.arange(15.0, 20.0)), "spectral_energy").values)


def test_dump_features(tmp_path):
    path = dump_features(np.arange(10.0), 4, FeatureKind.TIME_DOMAIN, tmp_path / "features.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,f0,f1,f2,f3,f4"
    assert len(lines) == 11
