from argparse import Namespace
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

# Namespace entries that are plumbing, not experiment settings
_INTERNAL_KEYS = {"handler", "config", "config_overrides"}


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class RunConfig(BaseModel):
    command: str
    flags: dict[str, Any] = Field(default_factory=dict)
    config_file: str | None = None
    config_overrides: dict[str, str] = Field(default_factory=dict)

    @classmethod
    def from_namespace(cls, args: Namespace, overrides: dict[str, str] | None = None) -> "RunConfig":
        flags = {
            key: _plain(value)
            for key, value in sorted(vars(args).items())
            if key not in _INTERNAL_KEYS and key != "command"
        }
        config_file = getattr(args, "config", None)
        return cls(
            command=args.command,
            flags=flags,
            config_file=str(config_file) if config_file else None,
            config_overrides=dict(overrides if overrides is not None else getattr(args, "config_overrides", {})),
        )
