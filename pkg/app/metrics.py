import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from scipy import stats

from .errors import DimensionMismatchError, DomainError
from .imageio import write_atomic
from .models import ImageBuffer
from .schemas import Adjacency, BitstreamFormat, Correlation, Histogram, StatReport

logger = logging.getLogger(__name__)

LEVELS = 256
CHI2_ALPHA = 0.01
CHI2_CRITICAL = float(stats.chi2.ppf(1.0 - CHI2_ALPHA, LEVELS - 1))


def _counts(channel: np.ndarray) -> np.ndarray:
    return np.bincount(channel.reshape(-1), minlength=LEVELS)


def entropy(img: ImageBuffer) -> List[float]:
    out = []
    for channel in img.data:
        prob = _counts(channel) / channel.size
        prob = prob[prob > 0]
        out.append(float(max(0.0, -np.sum(prob * np.log2(prob)))))
    return out


def _pairs(channel: np.ndarray, direction: Adjacency):
    if direction == Adjacency.HORIZONTAL:
        return channel[:, :-1], channel[:, 1:]
    if direction == Adjacency.VERTICAL:
        return channel[:-1, :], channel[1:, :]
    return channel[:-1, :-1], channel[1:, 1:]


def adjacent_correlation(
    img: ImageBuffer, direction: Adjacency, samples: Optional[int] = None, seed: int = 0
) -> Correlation:
    """Pearson r between each pixel and its neighbour; zero-variance series report r=0 flagged degenerate."""
    direction = Adjacency(direction)
    total = (img.height - (direction != Adjacency.HORIZONTAL)) * (img.width - (direction != Adjacency.VERTICAL))
    if total < 2:
        raise DomainError(f"{img.width}x{img.height} image has too few {direction.value} pairs")
    pick = None
    if samples is not None and samples < total:
        pick = np.random.default_rng(seed).choice(total, size=samples, replace=False)

    r, degenerate = [], []
    for channel in img.data:
        x, y = (side.reshape(-1).astype(np.float64) for side in _pairs(channel, direction))
        if pick is not None:
            x, y = x[pick], y[pick]
        if x.std() == 0 or y.std() == 0:
            logger.warning(f"Degenerate {direction.value} correlation: constant pixel series")
            r.append(0.0)
            degenerate.append(True)
        else:
            r.append(float(np.clip(np.corrcoef(x, y)[0, 1], -1.0, 1.0)))
            degenerate.append(False)
    return Correlation(direction=direction, r=r, degenerate=degenerate, pairs=len(pick) if pick is not None else total)


def _check_dims(a: ImageBuffer, b: ImageBuffer) -> None:
    if a.data.shape != b.data.shape:
        raise DimensionMismatchError(f"cannot compare images of shape {a.data.shape} and {b.data.shape}")


def npcr_per_channel(a: ImageBuffer, b: ImageBuffer) -> List[float]:
    _check_dims(a, b)
    return [float(np.mean(x != y) * 100.0) for x, y in zip(a.data, b.data)]


def uaci_per_channel(a: ImageBuffer, b: ImageBuffer) -> List[float]:
    _check_dims(a, b)
    return [
        float(np.mean(np.abs(x.astype(np.int16) - y.astype(np.int16))) / 255.0 * 100.0)
        for x, y in zip(a.data, b.data)
    ]


def npcr(a: ImageBuffer, b: ImageBuffer) -> float:
    _check_dims(a, b)
    return float(np.mean(a.data != b.data) * 100.0)


def uaci(a: ImageBuffer, b: ImageBuffer) -> float:
    _check_dims(a, b)
    return float(np.mean(np.abs(a.data.astype(np.int16) - b.data.astype(np.int16))) / 255.0 * 100.0)


def histogram(img: ImageBuffer) -> Histogram:
    counts = [_counts(channel) for channel in img.data]
    expected = img.height * img.width / LEVELS
    chi2 = [float(np.sum((c - expected) ** 2) / expected) for c in counts]
    return Histogram(
        counts=[c.tolist() for c in counts],
        chi2=chi2,
        p_values=[float(stats.chi2.sf(value, LEVELS - 1)) for value in chi2],
        critical_value=CHI2_CRITICAL,
    )


def _as_bytes(source: Union[ImageBuffer, bytes, np.ndarray]) -> np.ndarray:
    if isinstance(source, ImageBuffer):
        return source.flat()
    if isinstance(source, (bytes, bytearray)):
        return np.frombuffer(bytes(source), dtype=np.uint8)
    return np.ascontiguousarray(source, dtype=np.uint8).reshape(-1)


def export_bitstream(
    source: Union[ImageBuffer, bytes, np.ndarray], path: Union[str, Path], fmt: BitstreamFormat = BitstreamFormat.RAW
) -> int:
    """Writes the bits most-significant first; returns the bit count."""
    data = _as_bytes(source)
    if data.size == 0:
        raise DomainError("nothing to export: empty input")
    if BitstreamFormat(fmt) == BitstreamFormat.RAW:
        payload = data.tobytes()
    else:
        payload = (np.unpackbits(data) + ord("0")).astype(np.uint8).tobytes()
    write_atomic(path, payload)
    logger.info(f"Exported {data.size * 8} bits to {path}")
    return data.size * 8


def read_bitstream(path: Union[str, Path], fmt: BitstreamFormat = BitstreamFormat.RAW) -> np.ndarray:
    payload = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    if BitstreamFormat(fmt) == BitstreamFormat.RAW:
        return np.unpackbits(payload)
    bits = payload[np.isin(payload, (ord("0"), ord("1")))] - ord("0")
    return bits.astype(np.uint8)


def stat_report(
    img: ImageBuffer, cmp: Optional[ImageBuffer] = None, samples: Optional[int] = None, seed: int = 0
) -> StatReport:
    report = StatReport(
        entropy=entropy(img),
        correlation=[adjacent_correlation(img, direction, samples, seed) for direction in Adjacency],
        histogram=histogram(img),
        npcr=npcr(img, cmp) if cmp is not None else None,
        uaci=uaci(img, cmp) if cmp is not None else None,
        samples=samples,
        seed=seed,
    )
    logger.info(f"Statistics of {img.width}x{img.height}x{img.channels} image: entropy {min(report.entropy):.5f}")
    return report
