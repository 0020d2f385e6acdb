import argparse
from pathlib import Path

import structlog

from commands.common import add_phase_mode, add_seed, common_options
from schemas.signal_schema import CLASS_ORDER, PhaseMode, SignalClass
from services import sigsim
from services.dataset import write_iq

logger = structlog.get_logger(__name__)


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "simulate",
        parents=[common_options()],
        help="simulate one signal into a .iq8 file",
        description="Simulate a single signal; writes FILE.iq8 and its parameters as FILE.json.",
    )
    parser.add_argument("--class", dest="signal_class", required=True, choices=[c.value for c in CLASS_ORDER])
    parser.add_argument("--amplitude", type=float, help="fixed amplitude as a multiple of the noise sigma")
    parser.add_argument("--out", type=Path, required=True, help="output .iq8 path")
    add_seed(parser)
    add_phase_mode(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    params, series = sigsim.simulate(
        SignalClass(args.signal_class),
        args.seed,
        phase_mode=PhaseMode(args.phase_mode),
        amplitude=args.amplitude,
    )
    path = write_iq(series, args.out)
    path.with_suffix(".json").write_text(params.model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")
    logger.info("signal_simulated", path=str(path), signal_class=args.signal_class, amplitude_ratio=params.amplitude_ratio)
    return 0
