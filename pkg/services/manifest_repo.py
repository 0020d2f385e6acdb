import os
from pathlib import Path

from pydantic import ValidationError

from core.errors import DataError
from schemas.dataset_schema import Manifest, ManifestRecord

MANIFEST_NAME = "manifest.jsonl"
DATA_DIR_NAME = "data"


def manifest_path(root: str | Path) -> Path:
    return Path(root) / MANIFEST_NAME


def resolve_manifest(path: str | Path) -> tuple[Path, Path]:
    """Accept a corpus directory or a manifest file; return (manifest, corpus root)."""
    path = Path(path)
    if path.is_dir():
        path = manifest_path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    return path, path.parent


def write_manifest(records: Manifest, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    with open(tmp_path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(record.to_json())
            handle.write("\n")
    os.replace(tmp_path, path)
    return path


def read_manifest(path: str | Path) -> Manifest:
    path, _ = resolve_manifest(path)
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(ManifestRecord.model_validate_json(line))
            except ValidationError as exc:
                raise DataError(f"{path}:{line_number}: invalid manifest record: {exc}") from exc
    return records


def records_in_split(records: Manifest, *splits: str) -> Manifest:
    wanted = set(splits)
    return [r for r in records if r.split in wanted]
