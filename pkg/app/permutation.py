import logging
from functools import lru_cache
from typing import Tuple, Union

import numpy as np

from .errors import DimensionMismatchError, DomainError, NonBijectiveError
from .models import GridPermutation, ImageBuffer
from .schemas import ArnoldParams, Direction, SineConvention, StandardMapParams

logger = logging.getLogger(__name__)


def _round_half_away(v):
    return (np.sign(v) * np.floor(np.abs(v) + 0.5)).astype(np.int64)


def _arnold_step(x, y, params: ArnoldParams, n: int):
    t = params.t % n
    q = params.q % n
    return (x + t * y) % n, (q * x + (t * q + 1) * y) % n


def _standard_step(x, y, params: StandardMapParams, n: int):
    x_next = (x + y) % n
    if params.sine_convention == SineConvention.CONVENTIONAL:
        kick = _round_half_away(params.k * np.sin(2.0 * np.pi * x_next / n))
    else:
        kick = _round_half_away(params.k * np.sin(x * n / (2.0 * np.pi)))
    return x_next, (y + kick) % n


def _check_point(x: int, y: int, n: int) -> None:
    if n < 2:
        raise DomainError(f"grid side must be at least 2, got {n}")
    if not (0 <= x < n and 0 <= y < n):
        raise DomainError(f"point ({x}, {y}) outside the {n}x{n} grid")


def arnold_point(x: int, y: int, params: ArnoldParams, n: int) -> Tuple[int, int]:
    _check_point(x, y, n)
    x_next, y_next = _arnold_step(x, y, params, n)
    return int(x_next), int(y_next)


def standard_point(x: int, y: int, params: StandardMapParams, n: int) -> Tuple[int, int]:
    _check_point(x, y, n)
    x_next, y_next = _standard_step(np.int64(x), np.int64(y), params, n)
    return int(x_next), int(y_next)


def _step_table(params: Union[ArnoldParams, StandardMapParams], n: int) -> np.ndarray:
    x, y = np.divmod(np.arange(n * n, dtype=np.int64), n)
    if isinstance(params, ArnoldParams):
        x_next, y_next = _arnold_step(x, y, params, n)
    else:
        x_next, y_next = _standard_step(x, y, params, n)
    return x_next * n + y_next


def _first_collision(table: np.ndarray):
    order = np.argsort(table, kind="stable")
    ranked = table[order]
    repeats = np.nonzero(ranked[1:] == ranked[:-1])[0]
    if repeats.size == 0:
        return None
    sources = order[repeats + 1]
    pick = int(np.argmin(sources))
    target = int(ranked[repeats[pick]])
    other = int(order[np.searchsorted(ranked, target)])
    return int(sources[pick]), other, target


@lru_cache(maxsize=32)
def build_permutation(params: Union[ArnoldParams, StandardMapParams], n: int) -> GridPermutation:
    if n < 2:
        raise DomainError(f"grid side must be at least 2, got {n}")
    step = _step_table(params, n)
    collision = _first_collision(step)
    if collision is not None:
        source, other, target = collision
        raise NonBijectiveError(n, source, other, target)

    forward = np.arange(n * n, dtype=np.int64)
    for _ in range(params.iterations):
        forward = step[forward]
    inverse = np.empty_like(forward)
    inverse[forward] = np.arange(n * n, dtype=np.int64)
    logger.debug(f"Built {params.kind} permutation on {n}x{n} grid, {params.iterations} iterations")
    return GridPermutation(n=n, forward=forward, inverse=inverse)


def apply_permutation(img: ImageBuffer, perm: GridPermutation, direction: Direction = Direction.FORWARD) -> ImageBuffer:
    if img.height != perm.n or img.width != perm.n:
        raise DimensionMismatchError(
            f"image is {img.width}x{img.height}, permutation expects {perm.n}x{perm.n}"
        )
    flat = img.data.reshape(img.channels, -1)
    if direction == Direction.FORWARD:
        out = np.empty_like(flat)
        out[:, perm.forward] = flat
    else:
        out = flat[:, perm.forward]
    return img.with_data(np.ascontiguousarray(out).reshape(img.data.shape))
