import numpy as np
import pytest

from core.errors import InvalidArgumentError, ShapeError
from schemas.report_schema import DetectorConfig
from schemas.signal_schema import SignalClass, SimParams
from schemas.spectro_schema import SpectroConfig
from services import detector, sigsim
from services.spectro import power_spectrogram


def drifting_line(rows=64, cols=64, start=10, drift=0.5):
    power = np.zeros((rows, cols))
    r = np.arange(rows)
    power[r, (start + np.round(drift * r).astype(int)) % cols] = 1.0
    return power


def test_all_zero_power_scores_zero_at_zero_drift():
    result = detector.drift_search(np.zeros((16, 32)), max_drift=1.0, steps=9)
    assert result.score == 0.0
    assert result.drift == 0.0
    assert result.start_bin == 0


def test_synthetic_line_is_recovered():
    result = detector.drift_search(drifting_line(), max_drift=1.0, steps=257)
    assert result.drift == pytest.approx(0.5, abs=2.0 / 256)
    assert abs(result.start_bin - 10) <= 1
    assert result.score > 0


def test_drift_grid_bounds():
    grid = detector.drift_grid(2.0, 5)
    np.testing.assert_allclose(grid, [-2.0, -1.0, 0.0, 1.0, 2.0])
    assert detector.drift_grid(3.0, 1).tolist() == [0.0]
    result = detector.drift_search(drifting_line(), max_drift=0.25, steps=11)
    assert abs(result.drift) <= 0.25


def test_shuffled_rows_lose_the_line(rng):
    power = drifting_line()
    straight = detector.drift_search(power, 1.0, 257).score
    shuffled = detector.drift_search(power[rng.permutation(power.shape[0])], 1.0, 257).score
    assert shuffled <= 0.5 * straight


def test_adding_power_on_a_line_never_lowers_the_strongest_line(rng):
    drifts = detector.drift_grid(1.0, 33)
    for _ in range(20):
        power = rng.exponential(size=(32, 32))
        before = detector.drift_search(power, 1.0, 33)
        line = drifting_line(32, 32, start=int(rng.integers(0, 32)), drift=float(rng.choice(drifts)))
        after = detector.drift_search(power + rng.uniform(0.05, 0.5) * line, 1.0, 33)
        assert after.raw_score >= before.raw_score


def test_reported_line_is_the_strongest_raw_line(rng):
    power = rng.exponential(size=(32, 32)) + drifting_line(32, 32, start=7, drift=-0.25)
    drifts = detector.drift_grid(1.0, 33)
    result = detector.drift_search(power, 1.0, 33)
    sums = detector.line_sums(power, drifts)
    assert result.raw_score == sums.max()
    assert sums[list(drifts).index(result.drift), result.start_bin] == sums.max()


def test_ties_prefer_smaller_drift_magnitude_then_start_bin():
    power = drifting_line(start=3, drift=0.5) + drifting_line(start=40, drift=-0.5)
    result = detector.drift_search(power, max_drift=1.0, steps=5)
    assert (result.drift, result.start_bin) == (0.5, 3)

    mirrored = drifting_line(start=3, drift=-0.5) + drifting_line(start=40, drift=0.5)
    result = detector.drift_search(mirrored, max_drift=1.0, steps=5)
    assert (result.drift, result.start_bin) == (-0.5, 3)


def test_threads_do_not_change_the_result(rng):
    power = rng.exponential(size=(24, 40))
    drifts = detector.drift_grid(1.0, 17)
    np.testing.assert_array_equal(detector.line_sums(power, drifts, threads=1), detector.line_sums(power, drifts, threads=4))


def test_degenerate_spectrogram_is_rejected():
    with pytest.raises(ShapeError):
        detector.drift_search(np.zeros((1, 8)), 1.0, 3)
    with pytest.raises(InvalidArgumentError):
        detector.drift_search(np.zeros((4, 8)), 1.0, 0)


def test_noiseless_tone_drift_matches_argmax_regression():
    cfg = SpectroConfig()
    params = SimParams(signal_class=SignalClass.narrowband, A0=5.2, omega0=0.4, omega1=4e-6, sigma=0.0)
    power = power_spectrogram(sigsim.synthesize(params), cfg)
    measured = np.polyfit(np.arange(cfg.rows), power.argmax(axis=1), 1)[0]
    result = detector.drift_search(power, max_drift=1.0, steps=257)
    assert abs(result.drift - measured) <= 2.0 / 256


def test_threshold_is_the_noise_quantile(rng):
    scores = rng.exponential(size=200)
    assert detector.threshold_from_scores(scores, 0.5) == pytest.approx(np.median(scores))
    near_max = detector.threshold_from_scores(scores, 1.0 / len(scores))
    ordered = np.sort(scores)
    assert ordered[-2] <= near_max <= ordered[-1]
    with pytest.raises(InvalidArgumentError):
        detector.threshold_from_scores([], 0.1)
    with pytest.raises(InvalidArgumentError):
        detector.threshold_from_scores(scores, 1.0)


def test_calibration_needs_noise_only(record_factory):
    cfg = DetectorConfig()
    with pytest.raises(InvalidArgumentError):
        detector.calibrate_threshold([], 0.1, ".", SpectroConfig(), cfg)
    with pytest.raises(InvalidArgumentError):
        detector.calibrate_threshold([record_factory(SignalClass.narrowband, 0)], 0.1, ".", SpectroConfig(), cfg)


def test_detect_applies_threshold():
    power = drifting_line()
    low = detector.detect(power, DetectorConfig(steps=65, threshold=0.0))
    high = detector.detect(power, DetectorConfig(steps=65, threshold=1e9))
    assert low.detected and not high.detected
    assert low.threshold == 0.0


def test_calibrated_false_alarm_rate_on_fresh_noise():
    rng = np.random.default_rng(77)
    n, far = 2000, 0.1

    def noise_scores():
        return [detector.drift_search(rng.exponential(size=(32, 32)), 1.0, 33).score for _ in range(n)]

    threshold = detector.threshold_from_scores(noise_scores(), far)
    alarms = sum(s > threshold for s in noise_scores())
    assert abs(alarms - n * far) <= 3 * np.sqrt(n * far * (1 - far))


@pytest.mark.slow
def test_roc_auc_separates_narrowband_from_noise():
    spectro_cfg = SpectroConfig()
    cfg = DetectorConfig(steps=129)

    def scores(signal_class, amplitude, offset):
        out = []
        for seed in range(offset, offset + 200):
            _, series = sigsim.simulate(signal_class, seed, amplitude=amplitude)
            out.append(detector.detect(power_spectrogram(series, spectro_cfg), cfg, threads=4).score)
        return out

    signal_scores = scores(SignalClass.narrowband, 0.2, 0)
    noise_scores = scores(SignalClass.noise, None, 1000)
    assert detector.roc_auc(signal_scores, noise_scores) >= 0.95
