import argparse
from pathlib import Path

import structlog

from commands.common import add_spectrogram, common_options, load_manifest, spectro_config, write_run_config
from core.errors import UsageError
from schemas.report_schema import DetectionLine, DetectorConfig
from services import detector
from services.dataset import read_iq
from services.reports import write_text
from services.spectro import power_spectrogram

logger = structlog.get_logger(__name__)


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "detect",
        parents=[common_options()],
        help="linear-drift baseline detector; prints one JSON line per record",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--manifest", type=Path, help="corpus directory or manifest.jsonl")
    source.add_argument("--in", dest="input", type=Path, help="single .iq8 file")
    parser.add_argument("--max-drift", type=float, default=1.0, help="largest |drift| searched, bins per row")
    parser.add_argument("--steps", type=int, default=257, help="number of drift hypotheses")
    threshold = parser.add_mutually_exclusive_group()
    threshold.add_argument("--threshold", type=float, help="fixed detection threshold")
    threshold.add_argument("--calibrate-far", type=float, help="calibrate the threshold to this false-alarm rate")
    parser.add_argument("--noise-manifest", type=Path, help="noise-only corpus used by --calibrate-far")
    parser.add_argument("--out", type=Path, help="directory for detections.jsonl")
    add_spectrogram(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    spectro_cfg = spectro_config(args)
    cfg = DetectorConfig(max_drift=args.max_drift, steps=args.steps, threshold=args.threshold)

    if args.calibrate_far is not None:
        if args.noise_manifest is None:
            raise UsageError("--calibrate-far needs --noise-manifest")
        noise, noise_root = load_manifest(args.noise_manifest)
        threshold = detector.calibrate_threshold(
            noise, args.calibrate_far, noise_root, spectro_cfg, cfg, args.threads
        )
        cfg = cfg.model_copy(update={"threshold": threshold})

    if args.input is not None:
        power = power_spectrogram(read_iq(args.input, spectro_cfg.length), spectro_cfg)
        ids, detections = [args.input.stem], [detector.detect(power, cfg, args.threads)]
    else:
        records, root = load_manifest(args.manifest)
        ids = [r.id for r in records]
        detections = detector.score_records(records, root, spectro_cfg, cfg, args.threads)

    lines = [
        DetectionLine(id=i, score=d.score, drift=d.drift, start_bin=d.start_bin, detected=d.detected).model_dump_json()
        for i, d in zip(ids, detections)
    ]
    text = "".join(line + "\n" for line in lines)
    print(text, end="")

    if args.out is not None:
        write_text(text, args.out / "detections.jsonl")
        write_run_config(args, args.out)
    logger.info("detection_done", records=len(lines), threshold=cfg.threshold)
    return 0
