import argparse
import logging

from . import output_options
from .. import dependencies
from ..metrics import stat_report
from ..schemas import AnalysisReport, ArnoldParams, StandardMapParams
from ..sensitivity import permutation_correlation
from ..settings import settings

logger = logging.getLogger(__name__)

STUDY_ITERATIONS = (3, 5)


def analyze(args: argparse.Namespace) -> int:
    img = dependencies.load_any(args.input)
    cmp = dependencies.load_any(args.cmp) if args.cmp else None
    samples = args.samples if args.samples is not None else settings.CORRELATION_SAMPLES
    stats = stat_report(img, cmp, samples, args.seed)

    studies = []
    if args.permutation:
        for iterations in STUDY_ITERATIONS:
            for params in (StandardMapParams(iterations=iterations), ArnoldParams(iterations=iterations)):
                studies.append(permutation_correlation(img, params, samples, args.seed))
        logger.info(f"Permutation study over {len(studies)} map settings")

    dependencies.emit_report(AnalysisReport(stats=stats, permutation=studies), args)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("analyze", parents=[output_options()], help="Statistical metrics of an image")
    parser.add_argument("--in", dest="input", required=True, help="Image or ciphertext container")
    parser.add_argument("--cmp", help="Second image for NPCR and UACI")
    parser.add_argument("--samples", type=int, default=None, help="Sample this many adjacent pairs (all by default)")
    parser.add_argument("--seed", type=int, default=settings.ANALYSIS_SEED)
    parser.add_argument(
        "--permutation", action="store_true", help="Also report correlation of the image after scrambling only"
    )
    parser.set_defaults(handler=analyze)
