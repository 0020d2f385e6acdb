"""Confusion matrices, per-class scores, cross-entropy and amplitude sweeps."""

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import structlog
from sklearn.metrics import confusion_matrix

from core.errors import DataError, InvalidArgumentError, ShapeError
from schemas.dataset_schema import Manifest
from schemas.report_schema import ClassReport, ClassScore, SweepPoint, SweepReport
from schemas.signal_schema import CLASS_ORDER, NUM_CLASSES, SignalClass
from schemas.spectro_schema import SpectroConfig
from services.dataset import load_features

logger = structlog.get_logger(__name__)

PROBABILITY_FLOOR = 1e-15

# rows, columns of a (class, class) table
CLASS_CODES = [c.code for c in CLASS_ORDER]


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[actual][predicted], classes in CLASS_ORDER."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES):
            raise ShapeError(f"confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES}, got {counts.shape}")
        if (counts < 0).any():
            raise InvalidArgumentError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def _codes(labels) -> np.ndarray:
    values = list(labels)
    if values and isinstance(values[0], SignalClass):
        return np.array([v.code for v in values], dtype=np.int64)
    if values and isinstance(values[0], str):
        return np.array([SignalClass(v).code for v in values], dtype=np.int64)
    return np.asarray(values, dtype=np.int64)


def confusion(pred, actual) -> ConfusionMatrix:
    pred, actual = _codes(pred), _codes(actual)
    if pred.shape != actual.shape:
        raise ShapeError(f"{len(pred)} predictions for {len(actual)} labels")
    if pred.size == 0:
        return ConfusionMatrix(np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64))
    return ConfusionMatrix(confusion_matrix(actual, pred, labels=CLASS_CODES))


def _ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.zeros(numerator.shape, dtype=np.float64)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


def report(cm: ConfusionMatrix) -> ClassReport:
    counts = cm.counts
    hits = np.diag(counts).astype(np.float64)
    precision = _ratio(hits, counts.sum(axis=0).astype(np.float64))
    recall = _ratio(hits, counts.sum(axis=1).astype(np.float64))
    f1 = _ratio(2 * precision * recall, precision + recall)

    scores = [
        ClassScore(
            signal_class=c,
            n=int(counts[i].sum()),
            precision=float(precision[i]),
            recall=float(recall[i]),
            f1=float(f1[i]),
        )
        for i, c in enumerate(CLASS_ORDER)
    ]
    accuracy = float(hits.sum() / cm.total) if cm.total else 0.0
    return ClassReport(classes=scores, macro_f1=float(f1.mean()), accuracy=accuracy)


def cross_entropy(probs, labels) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    labels = _codes(labels)
    if probs.ndim != 2 or probs.shape[0] != labels.shape[0]:
        raise ShapeError(f"probabilities of shape {probs.shape} for {labels.shape[0]} labels")
    if labels.size == 0:
        return float("nan")
    picked = probs[np.arange(labels.size), labels]
    return float(-np.log(np.maximum(picked, PROBABILITY_FLOOR)).mean())


def sweep_eval(
    predictor: Callable[[np.ndarray], np.ndarray],
    sweep_manifest: Manifest,
    root: str | Path,
    spectro_cfg: SpectroConfig,
    height: int,
    width: int,
    include_phase: bool = True,
    threads: int = 1,
) -> SweepReport:
    """Per-amplitude loss, accuracy, per-class F1 and the share of signals called noise.

    ``predictor`` maps a feature batch to class probabilities; pass
    ``Ensemble.predict_proba`` or ``functools.partial(classifier.predict, model)``.
    """
    untagged = [r.id for r in sweep_manifest if r.sweep_amplitude is None]
    if untagged:
        raise DataError(f"sweep records without an amplitude tag: {untagged[:3]}")

    groups: dict[float, Manifest] = defaultdict(list)
    for record in sweep_manifest:
        groups[record.sweep_amplitude].append(record)

    points = []
    for amplitude in sorted(groups):
        records = groups[amplitude]
        features, labels, _ = load_features(
            records, root, spectro_cfg, height, width, include_phase, threads
        )
        probs = predictor(features)
        predicted = probs.argmax(axis=1)
        class_report = report(confusion(predicted, labels))

        signal_mask = labels != SignalClass.noise.code
        noise_fraction = (
            float((predicted[signal_mask] == SignalClass.noise.code).mean()) if signal_mask.any() else 0.0
        )
        point = SweepPoint(
            amplitude=amplitude,
            n=len(records),
            loss=cross_entropy(probs, labels),
            accuracy=float((predicted == labels).mean()),
            noise_fraction=noise_fraction,
            f1={s.signal_class: s.f1 for s in class_report.classes},
        )
        logger.info("sweep_point", amplitude=amplitude, n=point.n, loss=round(point.loss, 4), accuracy=point.accuracy)
        points.append(point)
    return SweepReport(points=points)


def f1_onset(sweep: SweepReport, signal_class: SignalClass, level: float = 0.5) -> float | None:
    """Smallest amplitude whose F1 for ``signal_class`` exceeds ``level``."""
    for point in sweep.points:
        if point.f1[signal_class] > level:
            return point.amplitude
    return None


def format_report(class_report: ClassReport) -> str:
    width = max(len(c.value) for c in CLASS_ORDER)
    lines = [f"{'class':<{width}}  {'N':>5}  {'precision':>9}  {'recall':>6}  {'F1':>5}"]
    for s in class_report.classes:
        lines.append(
            f"{s.signal_class.value:<{width}}  {s.n:>5}  {s.precision:>9.3f}  {s.recall:>6.3f}  {s.f1:>5.3f}"
        )
    lines.append(f"macro F1 {class_report.macro_f1:.4f}  accuracy {class_report.accuracy:.4f}")
    return "\n".join(lines)


def format_confusion(cm: ConfusionMatrix) -> str:
    width = max(len(c.value) for c in CLASS_ORDER)
    cell = max(5, len(str(int(cm.counts.max(initial=0)))) + 1)
    header = " " * width + "".join(f"{c.code:>{cell}}" for c in CLASS_ORDER)
    rows = [
        f"{c.value:<{width}}" + "".join(f"{v:>{cell}}" for v in cm.counts[i])
        for i, c in enumerate(CLASS_ORDER)
    ]
    return "\n".join([header, *rows])
