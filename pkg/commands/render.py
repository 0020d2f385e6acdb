import argparse
from pathlib import Path

import structlog

from commands.common import add_spectrogram, common_options, spectro_config
from services.dataset import read_iq
from services.spectro import make_features, render_pgm

logger = structlog.get_logger(__name__)


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "render",
        parents=[common_options()],
        help="render a .iq8 file as a PGM spectrogram image",
    )
    parser.add_argument("--in", dest="input", type=Path, required=True, help=".iq8 file")
    parser.add_argument("--channel", choices=["power", "phase"], default="power")
    parser.add_argument("--out", type=Path, required=True, help="output .pgm path")
    add_spectrogram(parser)
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    cfg = spectro_config(args)
    features = make_features(read_iq(args.input, cfg.length), cfg)
    channel = features.log_power if args.channel == "power" else features.phase
    render_pgm(channel, args.out)
    logger.info("spectrogram_rendered", path=str(args.out), channel=args.channel, rows=cfg.rows, cols=cfg.cols)
    return 0
