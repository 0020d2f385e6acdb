"""CSV renderings of reports, confusion matrices, histories and sweep curves."""

import csv
import io
from pathlib import Path

from schemas.model_schema import EpochRecord
from schemas.report_schema import ClassReport, SweepReport
from schemas.signal_schema import CLASS_ORDER, SignalClass
from services.evalx import ConfusionMatrix


def report_csv(class_report: ClassReport) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")

    writer.writerow(["class", "n", "precision", "recall", "f1"])
    for s in class_report.classes:
        writer.writerow([s.signal_class.value, s.n, f"{s.precision:.6f}", f"{s.recall:.6f}", f"{s.f1:.6f}"])
    writer.writerow(["macro", sum(s.n for s in class_report.classes), "", "", f"{class_report.macro_f1:.6f}"])

    return output.getvalue()


def confusion_csv(cm: ConfusionMatrix) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")

    writer.writerow(["actual"] + [c.value for c in CLASS_ORDER])
    for i, c in enumerate(CLASS_ORDER):
        writer.writerow([c.value] + [int(v) for v in cm.counts[i]])

    return output.getvalue()


def history_csv(history: list[EpochRecord]) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")

    writer.writerow(["epoch", "train_loss", "val_acc"])
    for record in history:
        writer.writerow([record.epoch, f"{record.train_loss:.6f}", f"{record.val_acc:.6f}"])

    return output.getvalue()


def sweep_csv(sweep: SweepReport) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")

    writer.writerow(["amplitude", "loss", "accuracy", "noise_fraction"] + [f"f1_{c.value}" for c in CLASS_ORDER])
    for point in sweep.points:
        writer.writerow(
            [f"{point.amplitude:g}", f"{point.loss:.6f}", f"{point.accuracy:.6f}", f"{point.noise_fraction:.6f}"]
            + [f"{point.f1[c]:.6f}" for c in CLASS_ORDER]
        )

    return output.getvalue()


def read_predictions_csv(path: str | Path) -> tuple[list[SignalClass], list[SignalClass]]:
    """Columns ``actual,predicted`` holding class names or integer codes."""
    actual, predicted = [], []
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            actual.append(_parse_class(row["actual"]))
            predicted.append(_parse_class(row["predicted"]))
    return actual, predicted


def _parse_class(value: str) -> SignalClass:
    value = value.strip()
    if value.isdigit():
        return SignalClass.from_code(int(value))
    return SignalClass(value)


def write_text(text: str, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
