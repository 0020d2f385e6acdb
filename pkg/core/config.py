import os
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

load_dotenv()


def _int_env(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    return int(value.strip())


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_").lstrip("_")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a ``key = value`` experiment file; keys are normalized to flag dests."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    values = dotenv_values(path)
    return {_normalize_key(k): v for k, v in values.items() if v is not None}


DATA_DIR = Path(os.getenv("SIGCLASS_DATA_DIR", "./runs"))
THREADS = max(1, _int_env("SIGCLASS_THREADS", 1))
LOG_LEVEL = os.getenv("SIGCLASS_LOG_LEVEL", "INFO").strip().upper()
LOG_FORMAT = os.getenv("SIGCLASS_LOG_FORMAT", "console").strip().lower()
MASTER_SEED = _int_env("SIGCLASS_MASTER_SEED", 0)

# Simulation constants
SIGNAL_LENGTH = 196608
NOISE_SIGMA = 13.0
