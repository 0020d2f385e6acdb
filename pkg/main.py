import argparse
import sys

import structlog
from pydantic import ValidationError

from commands import detect, evaluate, generate, render, simulate, sweep, train
from core.config import read_config_file
from core.errors import EXIT_DATA, EXIT_OK, EXIT_USAGE, SigclassError, UsageError
from core.logging import configure_logging

logger = structlog.get_logger(__name__)

COMMANDS = [generate, simulate, render, train, evaluate, sweep, detect]

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


class CommandParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> tuple[CommandParser, dict[str, argparse.ArgumentParser]]:
    parser = CommandParser(
        prog="sigclass",
        description="Synthetic radio-signal corpora, spectrogram features, WRN classification and drift detection.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    command_parsers = {}
    for module in COMMANDS:
        sub = module.register(subparsers)
        command_parsers[sub.prog.split()[-1]] = sub
    return parser, command_parsers


def _convert(action: argparse.Action, raw: str):
    if action.nargs == 0:
        value = raw.strip().lower()
        if value in _TRUE:
            return True
        if value in _FALSE:
            return False
        raise UsageError(f"config: '{action.dest}' expects a boolean, got '{raw}'")

    convert = action.type or str
    try:
        if action.nargs in ("+", "*"):
            value = [convert(v) for v in raw.replace(",", " ").split()]
            invalid = [v for v in value if action.choices is not None and v not in action.choices]
        else:
            value = convert(raw)
            invalid = [value] if action.choices is not None and value not in action.choices else []
    except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"config: invalid value '{raw}' for '{action.dest}': {exc}") from exc
    if invalid:
        raise UsageError(f"config: '{action.dest}' must be one of {list(action.choices)}, got {invalid[0]}")
    return value


def apply_config_file(sub: argparse.ArgumentParser, values: dict[str, str]) -> None:
    """Config file values become the subcommand's defaults, so explicit flags still win."""
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(values) - set(actions))
    if unknown:
        raise UsageError(f"config: unknown keys {unknown}")

    defaults = {dest: _convert(actions[dest], raw) for dest, raw in values.items()}
    for dest in defaults:
        actions[dest].required = False
    sub.set_defaults(**defaults)


def parse_args(argv=None) -> argparse.Namespace:
    parser, command_parsers = build_parser()
    args = parser.parse_args(argv)
    overrides: dict[str, str] = {}
    if args.config is not None:
        overrides = read_config_file(args.config)
        apply_config_file(command_parsers[args.command], overrides)
        args = parser.parse_args(argv)
    args.config_overrides = overrides
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        configure_logging(args.log_level)
        status = args.handler(args)
        return EXIT_OK if status is None else status
    except SigclassError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        logger.exception("unhandled_error")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
