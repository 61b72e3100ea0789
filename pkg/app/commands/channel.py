import argparse
import logging
from typing import Tuple

from . import cipher_options, key_options, output_options
from .. import dependencies
from ..propagation import measure_error_propagation, monte_carlo
from ..schemas import AnalysisReport, ChannelModel, KeyDelta, Mode, ParameterName
from ..sensitivity import key_sensitivity, plaintext_sensitivity
from ..settings import settings

logger = logging.getLogger(__name__)

PARAMETER_DELTA = 1e-13


def flip_coordinates(text: str) -> Tuple[int, int, int]:
    try:
        row, col, channel = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"flip must be ROW,COL,CHANNEL (1-based), got {text!r}")
    return row, col, channel


def channel(args: argparse.Namespace) -> int:
    mode = Mode(args.mode)
    # ECB is never a user-facing cipher mode, only an analysis override
    cfg = dependencies.get_cipher_config(args, mode=Mode.OFB if mode == Mode.ECB else None)
    key = dependencies.get_key(args)
    img = dependencies.load_any(args.input)
    ch = ChannelModel(p_e=args.pe, seed=args.seed)
    if args.trials > 1:
        report = monte_carlo(key, cfg, img, ch, args.trials, mode, args.flip)
    else:
        report = measure_error_propagation(key, cfg, img, ch, mode, args.flip)
    dependencies.emit_report(AnalysisReport(propagation=report), args)
    return 0


def keysens(args: argparse.Namespace) -> int:
    if args.param is not None:
        delta = KeyDelta(parameter=ParameterName(args.param), delta=args.delta)
    else:
        delta = KeyDelta(key_bit=args.key_bit)
    report = key_sensitivity(dependencies.load_any(args.input), dependencies.get_key(args), dependencies.get_cipher_config(args), delta)
    dependencies.emit_report(AnalysisReport(sensitivity=report), args)
    return 0


def ptsens(args: argparse.Namespace) -> int:
    report = plaintext_sensitivity(
        dependencies.load_any(args.input), dependencies.get_key(args), dependencies.get_cipher_config(args)
    )
    dependencies.emit_report(AnalysisReport(sensitivity=report), args)
    return 0


def register(subparsers) -> None:
    modes = (Mode.CBC, Mode.OFB, Mode.CFB, Mode.CTR, Mode.ECB)
    parser = subparsers.add_parser(
        "channel",
        parents=[output_options(), key_options(), cipher_options(modes)],
        help="Error propagation through a noisy channel",
    )
    parser.add_argument("--in", dest="input", default=None, help="Image (synthetic test image by default)")
    parser.add_argument("--pe", type=float, default=0.0, help="Channel bit error probability")
    parser.add_argument(
        "--flip", type=flip_coordinates, action="append", default=[], help="Flip the LSB at ROW,COL,CHANNEL (1-based)"
    )
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--seed", type=int, default=settings.ANALYSIS_SEED)
    parser.set_defaults(handler=channel)

    sens = subparsers.add_parser(
        "keysens", parents=[output_options(), key_options(), cipher_options()], help="Key sensitivity experiment"
    )
    sens.add_argument("--in", dest="input", default=None)
    target = sens.add_mutually_exclusive_group(required=True)
    target.add_argument("--key-bit", type=int, help="Flip this key bit (0 is the least significant)")
    target.add_argument("--param", choices=[p.value for p in ParameterName], help="Shift a derived parameter")
    sens.add_argument("--delta", type=float, default=PARAMETER_DELTA, help="Shift applied with --param")
    sens.set_defaults(handler=keysens)

    pt = subparsers.add_parser(
        "ptsens", parents=[output_options(), key_options(), cipher_options()], help="Plaintext sensitivity experiment"
    )
    pt.add_argument("--in", dest="input", default=None)
    pt.set_defaults(handler=ptsens)
