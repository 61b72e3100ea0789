import logging
from typing import Optional, Union

import numpy as np

from .cipher import encrypt_image_with_parameters
from .metrics import adjacent_correlation, npcr, npcr_per_channel, uaci, uaci_per_channel
from .models import CipherText, ImageBuffer
from .permutation import apply_permutation, build_permutation
from .schemas import (
    Adjacency,
    ArnoldParams,
    CipherConfig,
    KeyDelta,
    MapKind,
    PermutationCorrelation,
    SecretKey,
    SensitivityReport,
    StandardMapParams,
)
from .security import derive_parameters, perturb_parameter

logger = logging.getLogger(__name__)


def _compare(first: CipherText, second: CipherText) -> SensitivityReport:
    a, b = first.as_image(), second.as_image()
    changed = np.flatnonzero(a.flat() != b.flat())
    onward_npcr = onward_uaci = None
    if changed.size:
        start = int(changed[0])
        tail_a, tail_b = a.flat()[start:], b.flat()[start:]
        onward_npcr = float(np.mean(tail_a != tail_b) * 100.0)
        onward_uaci = float(np.mean(np.abs(tail_a.astype(np.int16) - tail_b.astype(np.int16))) / 255.0 * 100.0)
    return SensitivityReport(
        npcr=npcr(a, b),
        uaci=uaci(a, b),
        npcr_per_channel=npcr_per_channel(a, b),
        uaci_per_channel=uaci_per_channel(a, b),
        changed_blocks=int(changed.size),
        npcr_onward=onward_npcr,
        uaci_onward=onward_uaci,
    )


def key_sensitivity(img: ImageBuffer, key: SecretKey, cfg: CipherConfig, delta: KeyDelta) -> SensitivityReport:
    params = derive_parameters(key)
    if delta.key_bit is not None:
        changed = derive_parameters(key.flip_bit(delta.key_bit))
        label = f"key bit {delta.key_bit}"
    else:
        changed = perturb_parameter(params, delta.parameter, delta.delta)
        label = f"{delta.parameter.value} {delta.delta:+g}"
    report = _compare(
        encrypt_image_with_parameters(img, params, cfg),
        encrypt_image_with_parameters(img, changed, cfg),
    )
    logger.info(f"Key sensitivity ({label}): NPCR {report.npcr:.2f}%, UACI {report.uaci:.2f}%")
    return report


def plaintext_sensitivity(img: ImageBuffer, key: SecretKey, cfg: CipherConfig) -> SensitivityReport:
    """Flips the least-significant bit of the upper-left pixel of the first channel."""
    params = derive_parameters(key)
    flipped = img.clone()
    flipped.data[0, 0, 0] ^= 1
    report = _compare(
        encrypt_image_with_parameters(img, params, cfg),
        encrypt_image_with_parameters(flipped, params, cfg),
    )
    logger.info(
        f"Plaintext sensitivity ({cfg.mode.value}): {report.changed_blocks} changed blocks, "
        f"NPCR {report.npcr:.2f}%, UACI {report.uaci:.2f}%"
    )
    return report


def permutation_correlation(
    img: ImageBuffer,
    params: Union[ArnoldParams, StandardMapParams],
    samples: Optional[int] = None,
    seed: int = 0,
) -> PermutationCorrelation:
    """Adjacent-pixel correlation of an image that has only been scrambled, not encrypted."""
    padded = img.padded_square()
    scrambled = apply_permutation(padded, build_permutation(params, padded.width))
    return PermutationCorrelation(
        kind=MapKind(params.kind),
        iterations=params.iterations,
        correlation=[adjacent_correlation(scrambled, direction, samples, seed) for direction in Adjacency],
    )
