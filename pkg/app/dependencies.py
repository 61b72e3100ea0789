import argparse
import json
import logging
from pathlib import Path
from typing import Optional

from . import container
from .errors import KeyFormatError
from .imageio import load_image, write_atomic
from .models import ImageBuffer
from .schemas import (
    AnalysisReport,
    ArnoldParams,
    CipherConfig,
    LfsrConfig,
    MapKind,
    Mode,
    SecretKey,
    SineConvention,
    StandardMapParams,
    Variant,
    VARIANT_MAPS,
)
from .security import load_key_file, parse_key
from .settings import settings
from .testimages import natural_image

logger = logging.getLogger(__name__)


def get_key(args: argparse.Namespace, required: bool = False) -> SecretKey:
    if getattr(args, "key_file", None):
        return load_key_file(args.key_file)
    if getattr(args, "key", None):
        return parse_key(args.key)
    if required:
        raise KeyFormatError("a key is required: pass --key or --key-file")
    return parse_key(settings.ANALYSIS_KEY)


def get_lfsr(args: argparse.Namespace) -> LfsrConfig:
    return LfsrConfig(degree=args.lfsr_degree, delta=args.lfsr_delta)


def get_map_params(args: argparse.Namespace, variant: Variant):
    kind = VARIANT_MAPS[variant]
    if kind == MapKind.ARNOLD:
        return ArnoldParams(
            t=args.arnold_t,
            q=args.arnold_q,
            iterations=args.arnold_m if args.arnold_m is not None else settings.DEFAULT_ITERATIONS,
        )
    if kind == MapKind.STANDARD:
        return StandardMapParams(
            k=args.std_k,
            iterations=args.std_iterations if args.std_iterations is not None else settings.DEFAULT_ITERATIONS,
            sine_convention=SineConvention(args.sine_convention),
        )
    return None


def get_cipher_config(args: argparse.Namespace, mode: Optional[Mode] = None) -> CipherConfig:
    variant = Variant(args.variant)
    return CipherConfig(
        variant=variant,
        mode=mode or Mode(args.mode),
        rounds=args.rounds,
        cfb_segment_bits=args.segment_bits,
        map_params=get_map_params(args, variant),
        iv=args.iv,
        lfsr=get_lfsr(args),
    )


def is_container(path: Path) -> bool:
    if path.suffix.lower() == ".cbs":
        return True
    with open(path, "rb") as handle:
        return handle.read(len(container.MAGIC)) == container.MAGIC


def load_any(path: Optional[str]) -> ImageBuffer:
    """An image file, a ciphertext container (its body viewed as an image), or the synthetic test image."""
    if path is None:
        return natural_image(settings.TEST_IMAGE_SIZE, seed=settings.ANALYSIS_SEED)
    path = Path(path)
    if is_container(path):
        return container.read_ciphertext(path).as_image()
    return load_image(path)


def report_path(path: str) -> Path:
    path = Path(path)
    if not path.is_absolute():
        path = Path(settings.REPORT_DIR) / path
    return path


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_report(report: AnalysisReport, as_json: bool) -> str:
    flat = report.flat()
    if as_json:
        return json.dumps(flat, indent=2) + "\n"
    return "".join(f"{key}={_format_value(value)}\n" for key, value in flat.items())


def emit_report(report: AnalysisReport, args: argparse.Namespace) -> None:
    text = render_report(report, args.json)
    print(text, end="")
    if args.report:
        path = report_path(args.report)
        write_atomic(path, text.encode("utf-8"))
        logger.info(f"Report written to {path}")
