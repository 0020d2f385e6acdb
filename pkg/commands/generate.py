import argparse
from pathlib import Path

import structlog

from commands.common import add_phase_mode, add_seed, common_options, write_run_config
from core.config import DATA_DIR
from core.errors import UsageError
from schemas.dataset_schema import CorpusSpec
from schemas.signal_schema import CLASS_ORDER, PhaseMode, SignalClass
from services.dataset import DEFAULT_SWEEP_AMPLITUDES, TEST_SET_COUNTS, generate_corpus, generate_sweep, kfold_split
from services.manifest_repo import manifest_path, write_manifest

logger = structlog.get_logger(__name__)

DEFAULT_SWEEP_PER_CLASS = 250


def _class_list(value: str) -> list[SignalClass]:
    try:
        return [SignalClass(name.strip()) for name in value.split(",") if name.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"unknown class in '{value}'; expected names from {[c.value for c in CLASS_ORDER]}"
        ) from exc


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "generate",
        parents=[common_options()],
        help="simulate a labeled corpus or an amplitude sweep",
        description="Simulate a labeled corpus (raw .iq8 files plus manifest.jsonl) or an amplitude sweep.",
    )
    parser.add_argument("--out", type=Path, default=DATA_DIR / "corpus", help="output directory")
    parser.add_argument(
        "--classes",
        type=_class_list,
        default=list(CLASS_ORDER),
        help="comma-separated class names (default: all seven)",
    )
    parser.add_argument("--count-per-class", type=int, help="records per class for a train/test corpus")
    parser.add_argument("--split", choices=["train", "test"], default="train", help="split label of the corpus")
    parser.add_argument(
        "--test-set",
        choices=["published"],
        help="use the published per-class test counts instead of --count-per-class (implies --split test)",
    )
    parser.add_argument("--folds", type=int, default=0, help="assign stratified k-fold splits to the corpus")
    parser.add_argument("--sweep", action="store_true", help="generate an amplitude sweep instead of a corpus")
    parser.add_argument(
        "--per-class",
        type=int,
        default=DEFAULT_SWEEP_PER_CLASS,
        help="sweep records per class and amplitude",
    )
    parser.add_argument(
        "--amplitudes",
        type=float,
        nargs="+",
        default=list(DEFAULT_SWEEP_AMPLITUDES),
        help="sweep amplitudes as multiples of the noise sigma",
    )
    add_seed(parser)
    add_phase_mode(parser)
    parser.set_defaults(handler=run)
    return parser


def _check_folds(k: int, spec: CorpusSpec) -> None:
    if not k:
        return
    if spec.split != "train":
        raise UsageError("--folds applies to training corpora only")
    if k < 2:
        raise UsageError(f"--folds must be >= 2, got {k}")
    smallest = min(spec.counts.values(), default=0)
    if smallest < k:
        raise UsageError(f"--folds {k} exceeds the per-class count {smallest}")


def run(args: argparse.Namespace) -> int:
    phase_mode = PhaseMode(args.phase_mode)

    if args.sweep:
        if args.folds:
            raise UsageError("--folds does not apply to a sweep")
        generate_sweep(
            args.seed,
            args.per_class,
            sorted(args.amplitudes),
            out_dir=args.out,
            phase_mode=phase_mode,
            threads=args.threads,
        )
        write_run_config(args, args.out)
        return 0

    if args.test_set == "published":
        spec = CorpusSpec(
            counts={c: TEST_SET_COUNTS[c] for c in args.classes},
            master_seed=args.seed,
            phase_mode=phase_mode,
            out_dir=args.out,
            split="test",
        )
    elif args.count_per_class is not None:
        spec = CorpusSpec.uniform(
            args.count_per_class,
            classes=args.classes,
            master_seed=args.seed,
            phase_mode=phase_mode,
            out_dir=args.out,
            split=args.split,
        )
    else:
        raise UsageError("one of --count-per-class, --test-set or --sweep is required")

    _check_folds(args.folds, spec)
    records = generate_corpus(spec, threads=args.threads)
    if args.folds:
        records = kfold_split(records, args.folds, args.seed)
        write_manifest(records, manifest_path(args.out))
        logger.info("folds_assigned", k=args.folds, records=len(records))

    write_run_config(args, args.out)
    return 0
