"""Linear-drift baseline detector.

Sums spectrogram power along every straight line start + drift * row
(wrapping in frequency) for a uniform grid of drift hypotheses, robustly
normalizes the line sums and reports the strongest line.

The median and spread are taken from the spectrogram itself, so added power
can shift them and lower the normalized score a little; the raw energy of the
strongest line (``raw_score``) never decreases.
"""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import structlog
from sklearn.metrics import roc_auc_score

from core.errors import InvalidArgumentError, ShapeError
from schemas.dataset_schema import Manifest
from schemas.report_schema import DetectorConfig, DriftDetection
from schemas.signal_schema import SignalClass
from schemas.spectro_schema import SpectroConfig
from services.dataset import read_iq
from services.spectro import power_spectrogram

logger = structlog.get_logger(__name__)


def drift_grid(max_drift: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise InvalidArgumentError(f"steps must be >= 1, got {steps}")
    if steps == 1:
        return np.zeros(1)
    return np.linspace(-max_drift, max_drift, steps)


def line_sums(power: np.ndarray, drifts: np.ndarray, threads: int = 1) -> np.ndarray:
    """Raw sums along every (drift, start) line; shape (len(drifts), C)."""
    rows, cols = power.shape
    row_index = np.arange(rows)
    starts = np.arange(cols)

    def _sums(drift: float) -> np.ndarray:
        shifts = np.round(drift * row_index).astype(np.int64)
        columns = (starts[np.newaxis, :] + shifts[:, np.newaxis]) % cols
        return power[row_index[:, np.newaxis], columns].sum(axis=0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.stack(list(pool.map(_sums, drifts)))
    return np.stack([_sums(d) for d in drifts])


def _robust_scale(sums: np.ndarray) -> np.ndarray:
    center = np.median(sums)
    deviation = np.abs(sums - center)
    spread = np.median(deviation)
    if spread <= 0:
        spread = deviation.mean()
    if spread <= 0:
        spread = 1.0
    return (sums - center) / spread


def drift_search(
    power: np.ndarray,
    max_drift: float,
    steps: int,
    threads: int = 1,
) -> DriftDetection:
    power = np.asarray(power, dtype=np.float64)
    if power.ndim != 2 or power.shape[0] < 2 or power.shape[1] < 2:
        raise ShapeError(f"spectrogram must be at least 2x2, got shape {power.shape}")

    drifts = drift_grid(max_drift, steps)
    sums = line_sums(power, drifts, threads)
    scores = np.maximum(_robust_scale(sums), 0.0)

    # Ties: smaller |drift|, then smaller start bin, then the negative drift.
    tied = np.argwhere(scores == scores.max())
    tied_drifts = drifts[tied[:, 0]]
    drift_index, start = tied[np.lexsort((tied_drifts, tied[:, 1], np.abs(tied_drifts)))[0]]
    return DriftDetection(
        score=float(scores[drift_index, start]),
        raw_score=float(sums.max()),
        start_bin=int(start),
        drift=float(drifts[drift_index]),
    )


def detect(power: np.ndarray, cfg: DetectorConfig, threads: int = 1) -> DriftDetection:
    result = drift_search(power, cfg.max_drift, cfg.steps, threads)
    if cfg.threshold is None:
        return result
    return result.model_copy(
        update={"threshold": cfg.threshold, "detected": result.score > cfg.threshold}
    )


def score_records(
    records: Manifest,
    root: str | Path,
    spectro_cfg: SpectroConfig,
    cfg: DetectorConfig,
    threads: int = 1,
) -> list[DriftDetection]:
    root = Path(root)

    def _score(record) -> DriftDetection:
        power = power_spectrogram(read_iq(root / record.file, record.params.L), spectro_cfg)
        return detect(power, cfg)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(_score, records))


def threshold_from_scores(scores, target_far: float) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise InvalidArgumentError("cannot calibrate a threshold without noise scores")
    if not 0.0 < target_far < 1.0:
        raise InvalidArgumentError(f"target false-alarm rate must lie in (0, 1), got {target_far}")
    return float(np.quantile(scores, 1.0 - target_far))


def calibrate_threshold(
    noise_manifest: Manifest,
    target_far: float,
    root: str | Path,
    spectro_cfg: SpectroConfig,
    cfg: DetectorConfig,
    threads: int = 1,
) -> float:
    if not noise_manifest:
        raise InvalidArgumentError("noise manifest is empty")
    foreign = [r.id for r in noise_manifest if r.signal_class is not SignalClass.noise]
    if foreign:
        raise InvalidArgumentError(f"calibration set must be noise only; found {foreign[:3]}")

    uncalibrated = cfg.model_copy(update={"threshold": None})
    scores = [d.score for d in score_records(noise_manifest, root, spectro_cfg, uncalibrated, threads)]
    threshold = threshold_from_scores(scores, target_far)
    logger.info("threshold_calibrated", records=len(scores), target_far=target_far, threshold=threshold)
    return threshold


def roc_auc(signal_scores, noise_scores) -> float:
    signal_scores = np.asarray(signal_scores, dtype=np.float64)
    noise_scores = np.asarray(noise_scores, dtype=np.float64)
    labels = np.concatenate([np.ones(signal_scores.size), np.zeros(noise_scores.size)])
    return float(roc_auc_score(labels, np.concatenate([signal_scores, noise_scores])))
