import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError
from .models import ImageBuffer

logger = logging.getLogger(__name__)

SUPPORTED_FORMATS = ("PPM", "BMP")
SUFFIX_FORMATS = {".ppm": "PPM", ".pgm": "PPM", ".pnm": "PPM", ".bmp": "BMP"}


def write_atomic(path: Union[str, Path], payload: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def load_image(path: Union[str, Path]) -> ImageBuffer:
    payload = Path(path).read_bytes()
    try:
        with Image.open(io.BytesIO(payload)) as im:
            if im.format not in SUPPORTED_FORMATS:
                raise ImageFormatError(f"{path}: unsupported image format {im.format}")
            if im.mode not in ("L", "RGB"):
                raise ImageFormatError(f"{path}: unsupported pixel mode {im.mode}")
            if im.format == "BMP" and im.mode != "RGB":
                raise ImageFormatError(f"{path}: only 24-bit BMP files are supported")
            im.load()
            array = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageFormatError(f"{path}: cannot decode image ({exc})")
    img = ImageBuffer.from_hwc(array)
    logger.debug(f"Loaded {img.width}x{img.height}x{img.channels} image from {path}")
    return img


def save_image(img: ImageBuffer, path: Union[str, Path], format: Optional[str] = None) -> None:
    path = Path(path)
    fmt = (format or SUFFIX_FORMATS.get(path.suffix.lower(), "")).upper()
    if fmt not in SUPPORTED_FORMATS:
        raise ImageFormatError(f"{path}: cannot write format {fmt or path.suffix!r}; use .ppm, .pgm or .bmp")
    if fmt == "BMP" and img.channels != 3:
        raise ImageFormatError("BMP output needs a 3-channel image")
    buffer = io.BytesIO()
    Image.fromarray(img.to_hwc()).save(buffer, format=fmt)
    write_atomic(path, buffer.getvalue())
    logger.info(f"Saved {img.width}x{img.height}x{img.channels} image to {path}")
