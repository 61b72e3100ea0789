import argparse

from ..schemas import LFSR_TAPS, Mode, SineConvention, Variant
from ..settings import settings


def output_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--json", action="store_true", help="Print the report as one JSON document")
    parser.add_argument("--report", help=f"Also write the report to this file (relative to {settings.REPORT_DIR})")
    return parser


def key_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--key", help="128-bit key as 32 hex digits")
    group.add_argument("--key-file", help="File holding 16 raw key bytes or the key in hex")
    return parser


def lfsr_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--lfsr-degree", type=int, choices=sorted(LFSR_TAPS), default=32, help="Perturbing LFSR length k")
    parser.add_argument("--lfsr-delta", type=int, default=1, help="Perturb the orbit every DELTA iterations")
    return parser


def cipher_options(modes=(Mode.CBC, Mode.OFB, Mode.CFB, Mode.CTR)) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False, parents=[lfsr_options()])
    parser.add_argument("--variant", choices=[v.value for v in Variant], default=settings.DEFAULT_VARIANT)
    parser.add_argument("--mode", choices=[m.value for m in modes], default=settings.DEFAULT_MODE)
    parser.add_argument("--rounds", type=int, default=settings.DEFAULT_ROUNDS, help="SP-network rounds, a multiple of 4")
    parser.add_argument("--segment-bits", type=int, default=8, help="CFB segment size s in bits (1-8)")
    parser.add_argument("--iv", type=int, default=None, help="Explicit 8-bit IV (derived from the key if omitted)")
    parser.add_argument("--arnold-t", type=int, default=1)
    parser.add_argument("--arnold-q", type=int, default=1)
    parser.add_argument("--arnold-m", type=int, default=None, help="Arnold map iterations")
    parser.add_argument("--std-k", type=float, default=1000.0, help="Standard map constant k")
    parser.add_argument("--std-iterations", type=int, default=None)
    parser.add_argument(
        "--sine-convention", choices=[c.value for c in SineConvention], default=SineConvention.CONVENTIONAL.value
    )
    return parser
