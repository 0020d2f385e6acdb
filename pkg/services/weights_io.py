"""Weight file codec.

Layout, all integers little-endian::

    magic          8 bytes   b"WRNWGT\\x00\\x01"
    version        uint32
    config_len     uint32
    config         config_len bytes, WrnConfig as UTF-8 JSON
    tensor_count   uint32
    tensor_count x:
        name_len   uint16
        name       name_len bytes, UTF-8
        ndim       uint8
        dims       ndim x uint32
        data       prod(dims) x float32
"""

import struct
from pathlib import Path

import numpy as np
import torch

from core.errors import DataError
from schemas.model_schema import WrnConfig

MAGIC = b"WRNWGT\x00\x01"
FORMAT_VERSION = 1


def save_weights(model: torch.nn.Module, cfg: WrnConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    config_bytes = cfg.model_dump_json().encode("utf-8")
    state = model.state_dict()

    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", FORMAT_VERSION, len(config_bytes)))
        handle.write(config_bytes)
        handle.write(struct.pack("<I", len(state)))
        for name, tensor in state.items():
            data = tensor.detach().cpu().numpy().astype("<f4")
            name_bytes = name.encode("utf-8")
            handle.write(struct.pack("<H", len(name_bytes)))
            handle.write(name_bytes)
            handle.write(struct.pack("<B", data.ndim))
            handle.write(struct.pack(f"<{data.ndim}I", *data.shape))
            handle.write(data.tobytes())
    return path


def _take(buffer: bytes, offset: int, size: int, path: Path) -> tuple[bytes, int]:
    end = offset + size
    if end > len(buffer):
        raise DataError(f"{path}: truncated weight file")
    return buffer[offset:end], end


def read_weights(path: str | Path) -> tuple[WrnConfig, dict[str, np.ndarray]]:
    path = Path(path)
    try:
        buffer = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read weights {path}: {exc}") from exc

    magic, offset = _take(buffer, 0, len(MAGIC), path)
    if magic != MAGIC:
        raise DataError(f"{path}: not a weight file")
    header, offset = _take(buffer, offset, 8, path)
    version, config_len = struct.unpack("<II", header)
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported weight format version {version}")
    config_bytes, offset = _take(buffer, offset, config_len, path)
    cfg = WrnConfig.model_validate_json(config_bytes)

    raw, offset = _take(buffer, offset, 4, path)
    (count,) = struct.unpack("<I", raw)
    tensors = {}
    for _ in range(count):
        raw, offset = _take(buffer, offset, 2, path)
        (name_len,) = struct.unpack("<H", raw)
        name_bytes, offset = _take(buffer, offset, name_len, path)
        raw, offset = _take(buffer, offset, 1, path)
        (ndim,) = struct.unpack("<B", raw)
        raw, offset = _take(buffer, offset, 4 * ndim, path)
        shape = struct.unpack(f"<{ndim}I", raw)
        data, offset = _take(buffer, offset, 4 * int(np.prod(shape, dtype=np.int64)), path)
        tensors[name_bytes.decode("utf-8")] = np.frombuffer(data, dtype="<f4").reshape(shape)
    if offset != len(buffer):
        raise DataError(f"{path}: trailing bytes after last tensor")
    return cfg, tensors
