import argparse
from pathlib import Path

from commands.common import add_spectrogram, common_options, load_manifest, spectro_config, write_run_config
from core.config import DATA_DIR
from core.errors import DataError
from services import classifier, evalx
from services.manifest_repo import records_in_split
from services.reports import sweep_csv, write_text


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "sweep",
        parents=[common_options()],
        help="loss, accuracy and per-class F1 at every sweep amplitude",
    )
    parser.add_argument("--weights", type=Path, nargs="+", required=True)
    parser.add_argument("--manifest", type=Path, required=True, help="sweep directory or manifest.jsonl")
    parser.add_argument("--out", type=Path, default=DATA_DIR / "sweep_report", help="output directory")
    add_spectrogram(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    manifest, root = load_manifest(args.manifest)
    records = records_in_split(manifest, "sweep")
    if not records:
        raise DataError(f"{args.manifest} holds no sweep records")

    ensemble = classifier.load_ensemble(args.weights)
    cfg = ensemble.config
    report = evalx.sweep_eval(
        ensemble.predict_proba,
        records,
        root,
        spectro_config(args),
        cfg.input_h,
        cfg.input_w,
        cfg.include_phase,
        args.threads,
    )

    text = sweep_csv(report)
    write_text(text, args.out / "sweep.csv")
    write_run_config(args, args.out)
    print(text, end="")
    return 0
