import argparse
from pathlib import Path

import structlog

from commands.common import add_seed, add_spectrogram, common_options, load_manifest, spectro_config, write_run_config
from core.config import DATA_DIR
from core.errors import UsageError
from schemas.dataset_schema import fold_index
from schemas.model_schema import WRN_PRESETS, TrainConfig, WrnConfig
from services import classifier
from services.dataset import kfold_split
from services.manifest_repo import write_manifest
from services.reports import history_csv, write_text

logger = structlog.get_logger(__name__)

FOLDS_MANIFEST_NAME = "folds.jsonl"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "train",
        parents=[common_options()],
        help="train a wide residual network (or a k-fold ensemble)",
    )
    parser.add_argument("--manifest", type=Path, required=True, help="corpus directory or manifest.jsonl")
    parser.add_argument("--out", type=Path, default=DATA_DIR / "model", help="output directory")

    arch = parser.add_argument_group("architecture")
    arch.add_argument("--arch", choices=sorted(WRN_PRESETS), default="wrn-10-1")
    arch.add_argument("--depth", type=int, help="override the preset depth (6b+4)")
    arch.add_argument("--widen", type=int, help="override the preset widening factor")
    arch.add_argument("--dropout", type=float, default=0.3)
    arch.add_argument("--input-h", type=int, default=96)
    arch.add_argument("--input-w", type=int, default=128)
    arch.add_argument("--no-phase", action="store_true", help="train on the log-power channel only")

    opt = parser.add_argument_group("optimizer")
    opt.add_argument("--epochs", type=int, default=30)
    opt.add_argument("--batch-size", type=int, default=64)
    opt.add_argument("--lr", type=float, default=0.1)
    opt.add_argument("--lr-decay", type=float, default=0.2)
    opt.add_argument("--momentum", type=float, default=0.9)
    opt.add_argument("--weight-decay", type=float, default=5e-4)

    parser.add_argument("--ensemble", type=int, default=1, help="number of fold-held-out ensemble members")
    parser.add_argument("--folds", type=int, default=5, help="k of the stratified fold split")
    add_seed(parser)
    add_spectrogram(parser)
    parser.set_defaults(handler=run)
    return parser


def wrn_config(args: argparse.Namespace) -> WrnConfig:
    overrides = {
        "dropout": args.dropout,
        "in_channels": 1 if args.no_phase else 2,
        "input_h": args.input_h,
        "input_w": args.input_w,
    }
    cfg = WrnConfig.preset(args.arch, **overrides)
    if args.depth is not None or args.widen is not None:
        cfg = WrnConfig(
            depth=args.depth if args.depth is not None else cfg.depth,
            widen=args.widen if args.widen is not None else cfg.widen,
            **overrides,
        )
    return cfg


def run(args: argparse.Namespace) -> int:
    if args.ensemble < 1:
        raise UsageError("--ensemble must be >= 1")

    manifest, root = load_manifest(args.manifest)
    present = {fold_index(r.split) for r in manifest} - {None}
    if present != set(range(args.folds)):
        manifest = kfold_split(manifest, args.folds, args.seed)
        write_manifest(manifest, args.out / FOLDS_MANIFEST_NAME)

    wrn_cfg = wrn_config(args)
    train_cfg = TrainConfig(
        lr=args.lr,
        lr_decay=args.lr_decay,
        momentum=args.momentum,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
    )
    spectro_cfg = spectro_config(args)
    args.out.mkdir(parents=True, exist_ok=True)

    if args.ensemble == 1:
        assignment = classifier.fold_assignments(args.folds, 1)[0]
        model, history = classifier.train(
            manifest, root, assignment, wrn_cfg, train_cfg, spectro_cfg, threads=args.threads
        )
        classifier.save(model, args.out / "model.wrn")
        write_text(history_csv(history), args.out / "history.csv")
    else:
        ensemble, histories = classifier.train_ensemble(
            manifest, root, args.folds, args.ensemble, wrn_cfg, train_cfg, spectro_cfg, threads=args.threads
        )
        for index, (member, history) in enumerate(zip(ensemble.members, histories)):
            classifier.save(member, args.out / f"model_{index}.wrn")
            write_text(history_csv(history), args.out / f"history_{index}.csv")

    write_run_config(args, args.out)
    logger.info(
        "training_finished",
        out=str(args.out),
        members=args.ensemble,
        parameters=classifier.parameter_count(classifier.build(wrn_cfg)),
    )
    return 0
