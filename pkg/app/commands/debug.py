import argparse
import json

import numpy as np

from . import key_options, lfsr_options
from .. import dependencies
from ..chaos import PerturbedOrbit
from ..metrics import export_bitstream
from ..schemas import BitstreamFormat
from ..security import derive_parameters, seeded_lfsr
from ..selftest import run_selftest


def _count(text: str) -> int:
    count = int(text)
    if count < 0:
        raise argparse.ArgumentTypeError(f"count must be non-negative, got {count}")
    return count


def orbit_dump(args: argparse.Namespace) -> int:
    params = derive_parameters(dependencies.get_key(args))
    lfsr = seeded_lfsr(dependencies.get_lfsr(args), params)
    if args.orbit == 1:
        orbit = PerturbedOrbit(params.alpha, params.x0, lfsr)
    else:
        orbit = PerturbedOrbit(params.beta, params.y0, lfsr)
    values = orbit.generate(args.count)
    if args.output:
        export_bitstream(values.astype(">u4").view(np.uint8), args.output, BitstreamFormat(args.format))
    else:
        print("".join(f"{int(value):08x}\n" for value in values), end="")
    return 0


def selftest(args: argparse.Namespace) -> int:
    checks = run_selftest()
    if args.json:
        print(json.dumps([check.model_dump() for check in checks], indent=2))
    else:
        for check in checks:
            status = "ok" if check.passed else f"FAILED ({check.failures})"
            print(f"{check.name}: {status} [{check.cases} cases]")
    return 0 if all(check.passed for check in checks) else 1


def register(subparsers) -> None:
    dump = subparsers.add_parser("orbit-dump", parents=[key_options(), lfsr_options()], help="Dump a chaotic orbit")
    dump.add_argument("--orbit", type=int, choices=(1, 2), default=1)
    dump.add_argument("--count", type=_count, default=1024)
    dump.add_argument("--out", dest="output", default=None, help="Write a bitstream instead of hex words")
    dump.add_argument("--format", choices=[f.value for f in BitstreamFormat], default=BitstreamFormat.RAW.value)
    dump.set_defaults(handler=orbit_dump)

    check = subparsers.add_parser("selftest", help="Exhaustive inverse and bijectivity checks")
    check.add_argument("--json", action="store_true")
    check.set_defaults(handler=selftest)
