from functools import lru_cache
from typing import List, Tuple

import numba as nb
import numpy as np

from .errors import DomainError
from .schemas import CROSS_STAGES, BitPermutation, FixedPointValue, PermControl, PermKind, RoundSubKeys

SOCEK_SLICE_WIDTHS = (3, 3, 3, 2, 2, 2, 1)
_SLICE_WIDTHS = np.array(SOCEK_SLICE_WIDTHS, dtype=np.int64)


def substitute(u, v, r: int):
    if r % 2 == 0:
        return u ^ v
    return (u + v) & 0xFF


def substitute_inverse(u, v, r: int):
    if r % 2 == 0:
        return u ^ v
    return (u - v) & 0xFF


def socek_permutation_from_control(ctrl: int) -> BitPermutation:
    """Ascending Fisher-Yates over 0..7, one bit slice of ctrl per swap (LSB end first)."""
    if not 0 <= ctrl <= 0xFFFF:
        raise DomainError(f"Socek control {ctrl} is not a 16-bit word")
    order = list(range(8))
    shift = 0
    for i, width in enumerate(SOCEK_SLICE_WIDTHS):
        choice = (ctrl >> shift) & ((1 << width) - 1)
        shift += width
        j = i + choice % (8 - i)
        order[i], order[j] = order[j], order[i]
    return BitPermutation(perm=tuple(order))


def socek_permute(b, perm: BitPermutation):
    out = b & 0
    for source, dest in enumerate(perm.perm):
        out = out | (((b >> source) & 1) << dest)
    return out


def socek_inverse(b, perm: BitPermutation):
    out = b & 0
    for source, dest in enumerate(perm.perm):
        out = out | (((b >> dest) & 1) << source)
    return out


def _check_stages(*stages: int) -> None:
    for stage in stages:
        if stage not in CROSS_STAGES:
            raise DomainError(f"butterfly distance must be one of {CROSS_STAGES}, got {stage}")


@lru_cache(maxsize=None)
def _pair_lows(m: int) -> Tuple[int, ...]:
    return tuple(low for low in range(8) if not low & m)


def _butterfly(b, m: int, bits: int):
    for rank, low in enumerate(_pair_lows(m)):
        if (bits >> rank) & 1:
            swap = ((b >> low) ^ (b >> (low + m))) & 1
            b = b ^ (swap * ((1 << low) | (1 << (low + m))))
    return b


def cross_permute(b, cfg: int, m1: int = 1, m2: int = 4):
    _check_stages(m1, m2)
    return _butterfly(_butterfly(b, m1, cfg & 0xF), m2, (cfg >> 4) & 0xF)


def cross_inverse(b, cfg: int, m1: int = 1, m2: int = 4):
    _check_stages(m1, m2)
    return _butterfly(_butterfly(b, m2, (cfg >> 4) & 0xF), m1, cfg & 0xF)


def cross_table(cfg: int, m1: int = 1, m2: int = 4) -> BitPermutation:
    return BitPermutation(perm=tuple(cross_permute(1 << i, cfg, m1, m2).bit_length() - 1 for i in range(8)))


def control_permutation(control: PermControl) -> BitPermutation:
    if control.kind == PermKind.SOCEK:
        return socek_permutation_from_control(control.socek_bits)
    return cross_table(control.cross_cfg, *control.stages)


def derive_round_material(
    v: FixedPointValue, kind: PermKind, stages: Tuple[int, int] = (1, 4)
) -> Tuple[RoundSubKeys, List[PermControl]]:
    raw = v.raw
    subkeys = RoundSubKeys(c=tuple((raw >> shift) & 0xFF for shift in (24, 16, 8, 0)))
    if kind == PermKind.SOCEK:
        controls = [PermControl(kind=kind, socek_bits=word, stages=stages) for word in (raw >> 16, raw & 0xFFFF)]
    else:
        controls = [PermControl(kind=kind, cross_cfg=byte, stages=stages) for byte in subkeys.c]
    return subkeys, controls


@nb.njit(cache=True, nogil=True)
def _socek_tables(controls):
    out = np.empty((controls.shape[0], 8), dtype=np.int64)
    for u in range(controls.shape[0]):
        ctrl = controls[u]
        for i in range(8):
            out[u, i] = i
        shift = 0
        for i in range(7):
            width = _SLICE_WIDTHS[i]
            choice = (ctrl >> shift) & ((1 << width) - 1)
            shift += width
            j = i + choice % (8 - i)
            held = out[u, i]
            out[u, i] = out[u, j]
            out[u, j] = held
    return out


@lru_cache(maxsize=8)
def _cross_lookup(m1: int, m2: int) -> np.ndarray:
    return np.array([cross_table(cfg, m1, m2).perm for cfg in range(256)], dtype=np.int64)


def bit_tables(kind: PermKind, controls: np.ndarray, stages: Tuple[int, int] = (1, 4)) -> np.ndarray:
    """Destination tables, one row of 8 per control word."""
    controls = np.ascontiguousarray(controls, dtype=np.int64)
    if kind == PermKind.SOCEK:
        return _socek_tables(controls)
    _check_stages(*stages)
    return _cross_lookup(*stages)[controls]
