import argparse
from pathlib import Path

import structlog

from commands.common import add_spectrogram, common_options, load_manifest, spectro_config, write_run_config
from core.errors import DataError
from services import classifier, evalx
from services.dataset import load_features
from services.manifest_repo import records_in_split
from services.reports import confusion_csv, read_predictions_csv, report_csv, write_text

logger = structlog.get_logger(__name__)

ALL_SPLITS = "all"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "eval",
        parents=[common_options()],
        help="confusion matrix and per-class precision/recall/F1",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--weights", type=Path, nargs="+", help="one weight file, or several for an ensemble")
    source.add_argument("--predictions", type=Path, help="CSV with actual,predicted columns")
    parser.add_argument("--manifest", type=Path, help="corpus directory or manifest.jsonl (with --weights)")
    parser.add_argument("--split", default="test", help="manifest split to evaluate, or 'all' for every record")
    parser.add_argument("--out", type=Path, help="directory for report.csv and confusion.csv")
    add_spectrogram(parser)
    parser.set_defaults(handler=run)
    return parser


def _model_predictions(args: argparse.Namespace):
    if args.manifest is None:
        raise DataError("--weights needs --manifest")
    manifest, root = load_manifest(args.manifest)
    records = manifest if args.split == ALL_SPLITS else records_in_split(manifest, args.split)
    if not records:
        raise DataError(f"no records in split '{args.split}' of {args.manifest}")

    ensemble = classifier.load_ensemble(args.weights)
    cfg = ensemble.config
    features, labels, _ = load_features(
        records, root, spectro_config(args), cfg.input_h, cfg.input_w, cfg.include_phase, args.threads
    )
    predicted = ensemble.predict_proba(features).argmax(axis=1)
    return predicted, labels


def run(args: argparse.Namespace) -> int:
    if args.predictions is not None:
        actual, predicted = read_predictions_csv(args.predictions)
    else:
        predicted, actual = _model_predictions(args)

    cm = evalx.confusion(predicted, actual)
    class_report = evalx.report(cm)
    print(evalx.format_report(class_report))
    print()
    print(evalx.format_confusion(cm))

    if args.out is not None:
        write_text(report_csv(class_report), args.out / "report.csv")
        write_text(confusion_csv(cm), args.out / "confusion.csv")
        write_run_config(args, args.out)
    logger.info("evaluated", records=cm.total, accuracy=class_report.accuracy, macro_f1=class_report.macro_f1)
    return 0
