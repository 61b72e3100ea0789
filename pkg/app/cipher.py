import logging
import time
from typing import Optional

import numba as nb
import numpy as np
from pydantic import BaseModel, model_validator

from .chaos import PerturbedOrbit
from .errors import ConfigError, DomainError, HeaderMismatchError, TruncatedDataError
from .models import CipherHeader, CipherText, ImageBuffer
from .permutation import apply_permutation, build_permutation
from .schemas import (
    DEFAULT_CROSS_STAGES,
    ChaoticParameters,
    CipherConfig,
    Direction,
    FixedPointValue,
    LfsrConfig,
    Mode,
    PermKind,
    SecretKey,
)
from .security import derive_parameters, seeded_lfsr
from .spn import bit_tables

logger = logging.getLogger(__name__)

IV_WARMUP = 16


class RoundSchedule(BaseModel):
    """Round material for a stream: one substitution byte and one bit table per rotated round index."""

    rounds: int
    subkeys: np.ndarray
    tables: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @model_validator(mode="after")
    def check_shapes(self) -> "RoundSchedule":
        if self.rounds < 1:
            raise ValueError("a schedule needs at least one round")
        if self.subkeys.ndim != 1 or self.tables.shape != (self.subkeys.shape[0], 8):
            raise ValueError("subkeys and bit tables must cover the same units")
        if self.subkeys.shape[0] % self.rounds:
            raise ValueError("schedule must hold whole runs of round material")
        self.subkeys = np.ascontiguousarray(self.subkeys, dtype=np.int64)
        self.tables = np.ascontiguousarray(self.tables, dtype=np.int64)
        return self

    @property
    def units(self) -> int:
        return self.subkeys.shape[0]


def stream_units(length: int, mode: Mode, segment_bits: int = 8) -> int:
    if mode == Mode.CFB:
        return -(-8 * length // segment_bits)
    return length


def build_schedule(params: ChaoticParameters, cfg: CipherConfig, units: int) -> RoundSchedule:
    r = cfg.rounds
    runs = max(1, -(-units // r))
    lfsr = seeded_lfsr(cfg.lfsr, params)

    orbit1 = PerturbedOrbit(params.alpha, params.x0, lfsr)
    subkeys = orbit1.generate(runs * r // 4).astype(">u4").view(np.uint8)

    orbit2 = PerturbedOrbit(params.beta, params.y0, lfsr)
    if cfg.perm_kind == PermKind.SOCEK:
        controls = orbit2.generate(runs * r // 2).astype(">u4").view(">u2")
    else:
        controls = orbit2.generate(runs * r // 4).astype(">u4").view(np.uint8)

    tables = bit_tables(cfg.perm_kind, controls, cfg.cross_stages)
    logger.debug(f"Round schedule: {runs} runs of {r} rounds, {cfg.perm_kind.value} permutations")
    return RoundSchedule(rounds=r, subkeys=subkeys, tables=tables)


def derive_iv(params: ChaoticParameters, lfsr: Optional[LfsrConfig] = None) -> int:
    """Top byte of the 17th output of a separate orbit-1 run started from x0 with its lowest bit flipped."""
    start = FixedPointValue(raw=params.x0.raw ^ 1)
    orbit = PerturbedOrbit(params.alpha, start, seeded_lfsr(lfsr or LfsrConfig(), params))
    return int(orbit.generate(IV_WARMUP + 1)[IV_WARMUP]) >> 24


@nb.njit(cache=True, nogil=True)
def _permute_bits(b, table):
    out = 0
    for i in range(8):
        out |= ((b >> i) & 1) << table[i]
    return out


@nb.njit(cache=True, nogil=True)
def _unpermute_bits(b, table):
    out = 0
    for i in range(8):
        out |= ((b >> table[i]) & 1) << i
    return out


@nb.njit(cache=True, nogil=True)
def _spn_forward(b, unit, subkeys, tables, rounds):
    base = (unit // rounds) * rounds
    local = unit - base
    for j in range(rounds):
        idx = base + (local + j) % rounds
        if j % 2 == 0:
            b = b ^ subkeys[idx]
        else:
            b = (b + subkeys[idx]) & 0xFF
        b = _permute_bits(b, tables[idx])
    return b


@nb.njit(cache=True, nogil=True)
def _spn_inverse(b, unit, subkeys, tables, rounds):
    base = (unit // rounds) * rounds
    local = unit - base
    for j in range(rounds - 1, -1, -1):
        idx = base + (local + j) % rounds
        b = _unpermute_bits(b, tables[idx])
        if j % 2 == 0:
            b = b ^ subkeys[idx]
        else:
            b = (b - subkeys[idx]) & 0xFF
    return b


@nb.njit(cache=True, nogil=True)
def _cbc_encrypt(data, iv, subkeys, tables, rounds):
    out = np.empty_like(data)
    prev = np.int64(iv)
    for i in range(data.shape[0]):
        prev = _spn_forward(np.int64(data[i]) ^ prev, i, subkeys, tables, rounds)
        out[i] = prev
    return out


@nb.njit(cache=True, nogil=True)
def _cbc_decrypt(data, iv, subkeys, tables, rounds):
    out = np.empty_like(data)
    prev = np.int64(iv)
    for i in range(data.shape[0]):
        block = np.int64(data[i])
        out[i] = _spn_inverse(block, i, subkeys, tables, rounds) ^ prev
        prev = block
    return out


@nb.njit(cache=True, nogil=True)
def _ofb(data, iv, subkeys, tables, rounds):
    out = np.empty_like(data)
    feedback = np.int64(iv)
    for i in range(data.shape[0]):
        feedback = _spn_forward(feedback, i, subkeys, tables, rounds)
        out[i] = np.int64(data[i]) ^ feedback
    return out


@nb.njit(cache=True, nogil=True, parallel=True)
def _ctr(data, iv, subkeys, tables, rounds):
    out = np.empty_like(data)
    for i in nb.prange(data.shape[0]):
        counter = (np.int64(iv) + i) & 0xFF
        out[i] = np.int64(data[i]) ^ _spn_forward(counter, i, subkeys, tables, rounds)
    return out


@nb.njit(cache=True, nogil=True, parallel=True)
def _ecb(data, subkeys, tables, rounds, inverse):
    out = np.empty_like(data)
    for i in nb.prange(data.shape[0]):
        if inverse:
            out[i] = _spn_inverse(np.int64(data[i]), i, subkeys, tables, rounds)
        else:
            out[i] = _spn_forward(np.int64(data[i]), i, subkeys, tables, rounds)
    return out


@nb.njit(cache=True, nogil=True)
def _read_bits(data, pos, width):
    value = 0
    for k in range(width):
        p = pos + k
        value = (value << 1) | ((np.int64(data[p >> 3]) >> (7 - (p & 7))) & 1)
    return value


@nb.njit(cache=True, nogil=True)
def _write_bits(out, pos, width, value):
    for k in range(width):
        p = pos + k
        bit = (value >> (width - 1 - k)) & 1
        out[p >> 3] = np.int64(out[p >> 3]) | (bit << (7 - (p & 7)))


@nb.njit(cache=True, nogil=True)
def _cfb(data, iv, segment, subkeys, tables, rounds, decrypt):
    # bit string MSB first; the register shifts in ciphertext bits
    out = np.zeros_like(data)
    total = data.shape[0] * 8
    register = np.int64(iv)
    j = 0
    pos = 0
    while pos < total:
        width = min(segment, total - pos)
        keystream = _spn_forward(register, j, subkeys, tables, rounds) >> (8 - width)
        bits = _read_bits(data, pos, width)
        result = bits ^ keystream
        _write_bits(out, pos, width, result)
        cipher_bits = bits if decrypt else result
        register = ((register << width) | cipher_bits) & 0xFF
        pos += width
        j += 1
    return out


def _check_byte(b: int) -> None:
    if not 0 <= b <= 0xFF:
        raise DomainError(f"{b} is not a byte")


def _check_unit(schedule: RoundSchedule, i: int) -> None:
    if not 0 <= i < schedule.units:
        raise DomainError(f"block index {i} outside the {schedule.units}-unit schedule")


def spn_encrypt_byte(b: int, schedule: RoundSchedule, i: int) -> int:
    _check_byte(b)
    _check_unit(schedule, i)
    return int(_spn_forward(b, i, schedule.subkeys, schedule.tables, schedule.rounds))


def spn_decrypt_byte(b: int, schedule: RoundSchedule, i: int) -> int:
    _check_byte(b)
    _check_unit(schedule, i)
    return int(_spn_inverse(b, i, schedule.subkeys, schedule.tables, schedule.rounds))


class StreamCipher:
    """Chaining modes over a channel-major byte stream; the round schedule is built once and grown on demand."""

    def __init__(self, params: ChaoticParameters, cfg: CipherConfig, iv: Optional[int] = None):
        self.params = params
        self.cfg = cfg
        if iv is None:
            iv = cfg.iv if cfg.iv is not None else derive_iv(params, cfg.lfsr)
        self.iv = iv
        self._schedule: Optional[RoundSchedule] = None

    def schedule(self, units: int) -> RoundSchedule:
        if self._schedule is None or self._schedule.units < units:
            self._schedule = build_schedule(self.params, self.cfg, units)
        return self._schedule

    def _run(self, data: np.ndarray, mode: Optional[Mode], decrypt: bool) -> np.ndarray:
        mode = Mode(mode or self.cfg.mode)
        data = np.ascontiguousarray(data, dtype=np.uint8)
        if data.size == 0:
            return data.copy()
        s = self.cfg.cfb_segment_bits
        sched = self.schedule(stream_units(data.size, mode, s))
        material = (sched.subkeys, sched.tables, sched.rounds)
        if mode == Mode.CBC:
            kernel = _cbc_decrypt if decrypt else _cbc_encrypt
            return kernel(data, self.iv, *material)
        if mode == Mode.OFB:
            return _ofb(data, self.iv, *material)
        if mode == Mode.CTR:
            return _ctr(data, self.iv, *material)
        if mode == Mode.CFB:
            return _cfb(data, self.iv, s, *material, decrypt)
        return _ecb(data, *material, decrypt)

    def encrypt(self, data: np.ndarray, mode: Optional[Mode] = None) -> np.ndarray:
        return self._run(data, mode, decrypt=False)

    def decrypt(self, data: np.ndarray, mode: Optional[Mode] = None) -> np.ndarray:
        return self._run(data, mode, decrypt=True)


def encrypt_stream(
    data: np.ndarray, params: ChaoticParameters, cfg: CipherConfig, iv: Optional[int] = None, mode: Optional[Mode] = None
) -> np.ndarray:
    return StreamCipher(params, cfg, iv).encrypt(data, mode)


def decrypt_stream(
    data: np.ndarray, params: ChaoticParameters, cfg: CipherConfig, iv: Optional[int] = None, mode: Optional[Mode] = None
) -> np.ndarray:
    return StreamCipher(params, cfg, iv).decrypt(data, mode)


def scramble(img: ImageBuffer, cfg: CipherConfig, direction: Direction = Direction.FORWARD) -> ImageBuffer:
    if cfg.map_params is None:
        return img
    return apply_permutation(img, build_permutation(cfg.map_params, img.width), direction)


def _stages_recordable(cfg: CipherConfig) -> bool:
    return cfg.perm_kind != PermKind.CROSS or tuple(cfg.cross_stages) == DEFAULT_CROSS_STAGES


def encrypt_image_with_parameters(img: ImageBuffer, params: ChaoticParameters, cfg: CipherConfig) -> CipherText:
    if not _stages_recordable(cfg):
        raise ConfigError(
            f"Cross stages {cfg.cross_stages} are not stored in the container; image encryption uses {DEFAULT_CROSS_STAGES}"
        )
    started = time.perf_counter()
    padded = img.padded_square()
    scrambled = scramble(padded, cfg)
    engine = StreamCipher(params, cfg)
    body = engine.encrypt(scrambled.flat())
    header = CipherHeader(
        variant=cfg.variant,
        mode=cfg.mode,
        rounds=cfg.rounds,
        segment_bits=cfg.cfb_segment_bits,
        iv=engine.iv,
        width=padded.width,
        height=padded.height,
        channels=padded.channels,
        orig_width=padded.orig_width,
        orig_height=padded.orig_height,
        map_params=cfg.map_params,
    )
    elapsed = time.perf_counter() - started
    logger.info(
        f"Encrypted {img.width}x{img.height}x{img.channels} image "
        f"(variant {cfg.variant.value}, {cfg.mode.value}, r={cfg.rounds}) in {elapsed:.3f} s"
    )
    return CipherText(header=header, body=body.tobytes())


def encrypt_image(img: ImageBuffer, key: SecretKey, cfg: CipherConfig) -> CipherText:
    return encrypt_image_with_parameters(img, derive_parameters(key), cfg)


def check_header(header: CipherHeader, cfg: CipherConfig) -> None:
    mismatches = []
    if header.variant != cfg.variant:
        mismatches.append(f"variant {header.variant.value} != {cfg.variant.value}")
    if header.mode != cfg.mode:
        mismatches.append(f"mode {header.mode.value} != {cfg.mode.value}")
    if header.rounds != cfg.rounds:
        mismatches.append(f"rounds {header.rounds} != {cfg.rounds}")
    if cfg.mode == Mode.CFB and header.segment_bits != cfg.cfb_segment_bits:
        mismatches.append(f"segment bits {header.segment_bits} != {cfg.cfb_segment_bits}")
    if header.map_params != cfg.map_params:
        mismatches.append("map parameters differ")
    if cfg.iv is not None and header.iv != cfg.iv:
        mismatches.append(f"iv {header.iv} != {cfg.iv}")
    if not _stages_recordable(cfg):
        mismatches.append(f"Cross stages {cfg.cross_stages} != container stages {DEFAULT_CROSS_STAGES}")
    if header.width != header.height:
        mismatches.append(f"cipher grid {header.width}x{header.height} is not square")
    if mismatches:
        raise HeaderMismatchError("ciphertext header does not match configuration: " + "; ".join(mismatches))


def config_from_header(header: CipherHeader, lfsr: Optional[LfsrConfig] = None) -> CipherConfig:
    return CipherConfig(
        variant=header.variant,
        mode=header.mode,
        rounds=header.rounds,
        cfb_segment_bits=header.segment_bits,
        map_params=header.map_params,
        iv=header.iv,
        lfsr=lfsr or LfsrConfig(),
    )


def decrypt_image_with_parameters(ct: CipherText, params: ChaoticParameters, cfg: CipherConfig) -> ImageBuffer:
    started = time.perf_counter()
    header = ct.header
    check_header(header, cfg)
    expected = header.body_length
    if len(ct.body) < expected:
        raise TruncatedDataError(f"ciphertext body holds {len(ct.body)} of {expected} bytes")
    if len(ct.body) > expected:
        raise HeaderMismatchError(f"ciphertext body holds {len(ct.body)} bytes, header declares {expected}")

    stream = StreamCipher(params, cfg, iv=header.iv).decrypt(np.frombuffer(ct.body, dtype=np.uint8))
    scrambled = ImageBuffer.from_stream(
        stream, header.channels, header.height, header.width,
        orig_width=header.orig_width, orig_height=header.orig_height,
    )
    img = scramble(scrambled, cfg, Direction.INVERSE).cropped()
    elapsed = time.perf_counter() - started
    logger.info(f"Decrypted {img.width}x{img.height}x{img.channels} image in {elapsed:.3f} s")
    return img


def decrypt_image(ct: CipherText, key: SecretKey, cfg: CipherConfig) -> ImageBuffer:
    return decrypt_image_with_parameters(ct, derive_parameters(key), cfg)
