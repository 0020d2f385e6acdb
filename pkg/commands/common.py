import argparse
from pathlib import Path

import structlog

from core.config import LOG_LEVEL, MASTER_SEED, THREADS
from schemas.dataset_schema import Manifest
from schemas.run_schema import RunConfig
from schemas.signal_schema import PhaseMode
from schemas.spectro_schema import SpectroConfig
from services.manifest_repo import read_manifest, resolve_manifest

logger = structlog.get_logger(__name__)

RUN_CONFIG_NAME = "run_config.json"


def common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="key = value file; explicit flags win over its values")
    parent.add_argument("--threads", type=int, default=THREADS, help="worker threads (results do not depend on it)")
    parent.add_argument("--log-level", default=LOG_LEVEL, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parent


def add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=MASTER_SEED, help="master seed")


def add_phase_mode(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--phase-mode",
        default=PhaseMode.accumulate.value,
        choices=[m.value for m in PhaseMode],
        help="accumulate: integrate the frequency track (default); literal: phase = omega(t) * t",
    )


def add_spectrogram(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rows", type=int, default=384, help="spectrogram time slices")
    parser.add_argument("--cols", type=int, default=512, help="spectrogram frequency bins")


def spectro_config(args: argparse.Namespace) -> SpectroConfig:
    return SpectroConfig(rows=args.rows, cols=args.cols)


def load_manifest(path: str | Path) -> tuple[Manifest, Path]:
    _, root = resolve_manifest(path)
    return read_manifest(path), root


def write_run_config(args: argparse.Namespace, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RUN_CONFIG_NAME
    path.write_text(RunConfig.from_namespace(args).model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.debug("run_config_written", path=str(path))
    return path
