"""Corpus generation, persistence and loading.

Each record is a raw ``.iq8`` file (interleaved signed 8-bit I,Q, sample
major, no header) plus one line in ``manifest.jsonl``. The manifest is the
only index: loaders never list directories.
"""

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
import sys

import numpy as np
import structlog
from sklearn.model_selection import StratifiedKFold
from tqdm import tqdm

from core.config import SIGNAL_LENGTH
from core.errors import DataError, InvalidArgumentError
from core.rng import derive_seed
from schemas.dataset_schema import CorpusSpec, Manifest, ManifestRecord, fold_index, fold_name
from schemas.signal_schema import CLASS_ORDER, PhaseMode, SignalClass
from schemas.spectro_schema import SpectroConfig
from services import sigsim
from services.manifest_repo import DATA_DIR_NAME, manifest_path, write_manifest
from services.spectro import classifier_input

logger = structlog.get_logger(__name__)

SPLIT_CODES = {"train": 0, "test": 1, "sweep": 2}

DEFAULT_SWEEP_AMPLITUDES = (
    0.008, 0.01, 0.02, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1, 0.12, 0.16, 0.2, 0.4,
)

# Per-class sizes of the published held-out test set
TEST_SET_COUNTS: dict[SignalClass, int] = {
    SignalClass.brightpixel: 385,
    SignalClass.narrowband: 355,
    SignalClass.narrowbanddrd: 348,
    SignalClass.noise: 368,
    SignalClass.squarepulsednarrowband: 385,
    SignalClass.squiggle: 322,
    SignalClass.squigglesquarepulsednarrowband: 332,
}


def write_iq(series: sigsim.IqSeries, path: str | Path) -> Path:
    path = Path(path)
    interleaved = np.empty((len(series), 2), dtype=np.int8)
    interleaved[:, 0] = series.re
    interleaved[:, 1] = series.im
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(interleaved.tobytes())
    return path


def read_iq(path: str | Path, length: int = SIGNAL_LENGTH) -> sigsim.IqSeries:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(raw) != 2 * length:
        raise DataError(f"{path}: expected {2 * length} bytes, found {len(raw)}")
    interleaved = np.frombuffer(raw, dtype=np.int8).reshape(length, 2)
    return sigsim.IqSeries(re=interleaved[:, 0].copy(), im=interleaved[:, 1].copy())


def item_seed(master_seed: int, split: str, signal_class: SignalClass, index: int, group: int = 0) -> int:
    return derive_seed(master_seed, SPLIT_CODES[split], signal_class.code, group, index)


def _progress(iterable, total: int, desc: str):
    return tqdm(iterable, total=total, desc=desc, disable=not sys.stderr.isatty(), leave=False)


def _run_jobs(jobs: list[dict], out_dir: Path, phase_mode: PhaseMode, threads: int, desc: str) -> Manifest:
    written: list[Path] = []

    def _make(job: dict) -> ManifestRecord:
        params, series = sigsim.simulate(
            job["class"], job["seed"], phase_mode=phase_mode, amplitude=job.get("amplitude")
        )
        relative = f"{DATA_DIR_NAME}/{job['id']}.iq8"
        written.append(write_iq(series, out_dir / relative))
        return ManifestRecord(
            id=job["id"],
            signal_class=job["class"],
            params=params,
            file=relative,
            split=job["split"],
            sweep_amplitude=job.get("amplitude"),
        )

    try:
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            return list(_progress(pool.map(_make, jobs), len(jobs), desc))
    except Exception as exc:
        for path in written:
            path.unlink(missing_ok=True)
        logger.error("generation_failed", out_dir=str(out_dir), removed=len(written), error=str(exc))
        if isinstance(exc, OSError):
            raise DataError(f"corpus generation failed: {exc}") from exc
        raise


def generate_corpus(spec: CorpusSpec, threads: int = 1) -> Manifest:
    out_dir = Path(spec.out_dir)
    jobs = []
    for signal_class in CLASS_ORDER:
        for index in range(spec.counts.get(signal_class, 0)):
            jobs.append({
                "id": f"{spec.split}_{signal_class.value}_{index:06d}",
                "class": signal_class,
                "seed": item_seed(spec.master_seed, spec.split, signal_class, index),
                "split": spec.split,
            })

    records = _run_jobs(jobs, out_dir, spec.phase_mode, threads, "generate")
    write_manifest(records, manifest_path(out_dir))
    logger.info("corpus_generated", records=len(records), out_dir=str(out_dir), split=spec.split)
    return records


def generate_sweep(
    master_seed: int,
    per_class: int,
    amplitudes=DEFAULT_SWEEP_AMPLITUDES,
    out_dir: str | Path = "sweep",
    phase_mode: PhaseMode = PhaseMode.accumulate,
    threads: int = 1,
) -> Manifest:
    amplitudes = [float(a) for a in amplitudes]
    if not amplitudes:
        raise InvalidArgumentError("sweep needs at least one amplitude")
    if per_class < 0:
        raise InvalidArgumentError("per-class count must be >= 0")

    out_dir = Path(out_dir)
    jobs = []
    for group, amplitude in enumerate(amplitudes):
        for signal_class in CLASS_ORDER:
            for index in range(per_class):
                jobs.append({
                    "id": f"sweep_a{group:02d}_{signal_class.value}_{index:05d}",
                    "class": signal_class,
                    "seed": item_seed(master_seed, "sweep", signal_class, index, group=group),
                    "split": "sweep",
                    "amplitude": amplitude,
                })

    records = _run_jobs(jobs, out_dir, phase_mode, threads, "sweep")
    write_manifest(records, manifest_path(out_dir))
    logger.info("sweep_generated", records=len(records), amplitudes=len(amplitudes), out_dir=str(out_dir))
    return records


def kfold_split(manifest: Manifest, k: int, seed: int = 0) -> Manifest:
    """Stratified k-fold labels for every train/fold record; others pass through."""
    if k < 2:
        raise InvalidArgumentError(f"k must be >= 2, got {k}")

    eligible = [i for i, r in enumerate(manifest) if r.split == "train" or fold_index(r.split) is not None]
    per_class = defaultdict(int)
    for i in eligible:
        per_class[manifest[i].signal_class] += 1
    if not eligible or min(per_class.values()) < k:
        raise InvalidArgumentError(f"k={k} exceeds the smallest per-class count {min(per_class.values(), default=0)}")

    labels = np.array([manifest[i].signal_class.code for i in eligible])
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed % (2 ** 32))

    result = list(manifest)
    for fold, (_, members) in enumerate(splitter.split(np.zeros(len(labels)), labels)):
        for position in members:
            index = eligible[position]
            result[index] = manifest[index].model_copy(update={"split": fold_name(fold)})
    return result


def load_features(
    records: Manifest,
    root: str | Path,
    spectro_cfg: SpectroConfig,
    height: int,
    width: int,
    include_phase: bool = True,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Classifier inputs (N, ch, H, W), labels (N,) and ids, in manifest order."""
    root = Path(root)
    channels = 2 if include_phase else 1

    def _load(record: ManifestRecord) -> np.ndarray:
        series = read_iq(root / record.file, record.params.L)
        return classifier_input(series, spectro_cfg, height, width, include_phase)

    if not records:
        return np.zeros((0, channels, height, width), dtype=np.float32), np.zeros(0, dtype=np.int64), []

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        features = list(_progress(pool.map(_load, records), len(records), "features"))

    labels = np.array([r.signal_class.code for r in records], dtype=np.int64)
    return np.stack(features), labels, [r.id for r in records]
