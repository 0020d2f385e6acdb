import numpy as np
import pytest
from scipy import stats

from core.errors import ShapeError
from schemas.signal_schema import PhaseMode, SignalClass, SimParams
from schemas.spectro_schema import SpectroConfig, WindowKind
from services import sigsim
from services.spectro import (
    FeatureImage,
    classifier_input,
    downsample,
    make_features,
    normalize,
    power_spectrogram,
    render_pgm,
    window_coefficients,
)

SMALL = SpectroConfig(rows=8, cols=64, window=WindowKind.none)


def test_bin_centered_tone_peaks_at_shifted_bin():
    k, a0 = 5, 2.0
    t = np.arange(SMALL.length)
    x = a0 * np.exp(1j * 2 * np.pi * k / SMALL.cols * t)
    power = power_spectrogram(x, SMALL)
    assert np.all(power.argmax(axis=1) == SMALL.cols // 2 + k)
    np.testing.assert_allclose(power[:, SMALL.cols // 2 + k], (a0 * SMALL.cols) ** 2, rtol=1e-9)


def test_all_zero_input_gives_log_epsilon():
    img = make_features(np.zeros(SMALL.length), SMALL)
    np.testing.assert_array_equal(img.log_power, np.log(SMALL.epsilon))


def test_parseval_per_row(rng):
    x = rng.normal(size=SMALL.length) + 1j * rng.normal(size=SMALL.length)
    power = power_spectrogram(x, SMALL)
    energy = (np.abs(x) ** 2).reshape(SMALL.rows, SMALL.cols).sum(axis=1)
    np.testing.assert_allclose(power.sum(axis=1), SMALL.cols * energy, rtol=1e-9)


def test_length_mismatch_is_a_shape_error():
    with pytest.raises(ShapeError):
        make_features(np.zeros(SMALL.length - 1), SMALL)


def test_periodic_hann_window():
    cfg = SpectroConfig()
    w = window_coefficients(cfg)
    n = np.arange(cfg.cols)
    np.testing.assert_allclose(w, 0.5 * (1 - np.cos(2 * np.pi * n / cfg.cols)), atol=1e-15)
    assert w.sum() == pytest.approx(cfg.cols / 2, abs=1e-9)


def test_phase_lies_in_half_open_interval(rng):
    x = rng.normal(size=SMALL.length) + 1j * rng.normal(size=SMALL.length)
    phase = make_features(x, SMALL).phase
    assert np.all(phase > -np.pi) and np.all(phase <= np.pi)


def test_noise_phase_is_uniform():
    params = SimParams(signal_class=SignalClass.noise, A0=0.0, omega0=0.0, omega1=0.0, seed=8)
    # unwindowed bins of white noise are independent
    cfg = SpectroConfig(window=WindowKind.none)
    phase = make_features(sigsim.synthesize(params), cfg).phase.ravel()[:100_000]
    counts, _ = np.histogram(phase, bins=64, range=(-np.pi, np.pi))
    assert stats.chisquare(counts).pvalue > 0.01


def test_normalize_constant_channel_is_zero():
    img = normalize(FeatureImage(log_power=np.full((4, 4), 3.5), phase=np.ones((4, 4))))
    np.testing.assert_array_equal(img.log_power, 0.0)
    np.testing.assert_array_equal(img.phase, 0.0)


def test_normalize_standardizes_and_is_idempotent(rng):
    img = FeatureImage(log_power=rng.normal(4.0, 3.0, (16, 32)), phase=rng.uniform(-np.pi, np.pi, (16, 32)))
    once = normalize(img)
    for channel in (once.log_power, once.phase):
        assert abs(channel.mean()) < 1e-9
        assert channel.std() == pytest.approx(1.0, abs=1e-6)
    twice = normalize(once)
    assert np.max(np.abs(twice.log_power - once.log_power)) < 1e-6


def test_downsample_identity_blocks_and_checkerboard():
    base = np.arange(32, dtype=np.float64).reshape(4, 8)
    img = FeatureImage(log_power=base, phase=base)
    assert downsample(img, 4, 8) is img

    blocks = np.kron(np.array([[1.0, 2.0], [3.0, 4.0]]), np.ones((2, 2)))
    pooled = downsample(FeatureImage(log_power=blocks, phase=blocks), 2, 2)
    np.testing.assert_array_equal(pooled.log_power, [[1.0, 2.0], [3.0, 4.0]])

    checker = np.where((np.add.outer(np.arange(6), np.arange(6)) % 2) == 0, 1.0, -1.0)
    pooled = downsample(FeatureImage(log_power=checker, phase=checker), 3, 3)
    np.testing.assert_array_equal(pooled.log_power, 0.0)


def test_downsample_rejects_uneven_blocks():
    img = FeatureImage(log_power=np.zeros((6, 6)), phase=np.zeros((6, 6)))
    with pytest.raises(ShapeError):
        downsample(img, 4, 3)
    with pytest.raises(ShapeError):
        downsample(img, 12, 6)


def test_classifier_input_shape_and_channels():
    _, series = sigsim.simulate(SignalClass.narrowband, seed=3)
    both = classifier_input(series, SpectroConfig(), 96, 128)
    power_only = classifier_input(series, SpectroConfig(), 96, 128, include_phase=False)
    assert both.shape == (2, 96, 128) and both.dtype == np.float32
    assert power_only.shape == (1, 96, 128)
    np.testing.assert_array_equal(power_only[0], both[0])


@pytest.mark.parametrize("phase_mode", [PhaseMode.accumulate, PhaseMode.literal])
def test_drifting_tone_slope_matches_analytic_slope(phase_mode):
    cfg = SpectroConfig()
    omega1 = 3e-6
    params = SimParams(signal_class=SignalClass.narrowband, A0=5.2, omega0=0.0, omega1=omega1, sigma=0.0)
    power = power_spectrogram(sigsim.synthesize(params, phase_mode), cfg)
    rows = np.arange(cfg.rows)
    measured = np.polyfit(rows, power.argmax(axis=1), 1)[0]
    expected = sigsim.instantaneous_frequency_slope(params, cfg.cols, phase_mode)
    assert abs(measured - expected) < 0.02


def test_render_pgm_header_and_noise_histogram(tmp_path):
    params = SimParams(signal_class=SignalClass.noise, A0=0.0, omega0=0.0, omega1=0.0, seed=21)
    cfg = SpectroConfig()
    path = render_pgm(make_features(sigsim.quantize(sigsim.synthesize(params)), cfg).log_power, tmp_path / "noise.pgm")

    raw = path.read_bytes()
    header = b"P5\n512 384\n255\n"
    assert raw.startswith(header)
    pixels = np.frombuffer(raw[len(header):], dtype=np.uint8)
    assert pixels.size == 384 * 512
    assert pixels.max() == 255
    assert np.bincount(pixels, minlength=256).max() / pixels.size <= 0.05
