import logging
from typing import List

import numpy as np

from .chaos import lfsr_period
from .cipher import decrypt_image, encrypt_image
from .errors import ToolkitError
from .permutation import build_permutation
from .schemas import (
    ArnoldParams,
    CipherConfig,
    LfsrConfig,
    Mode,
    PermKind,
    SecretKey,
    SelfTestCheck,
    StandardMapParams,
    Variant,
)
from .spn import bit_tables
from .testimages import natural_image

logger = logging.getLogger(__name__)

BYTES = np.arange(256, dtype=np.int64)
CROSS_STAGE_PAIRS = ((1, 2), (1, 4), (2, 4))
SOCEK_SAMPLES = 4096
GRID_SIDES = (16, 64, 512)
SELFTEST_KEY = SecretKey(bits=bytes(range(16)))


def _permute(tables: np.ndarray) -> np.ndarray:
    """All 256 bytes through every table: shape (tables, 256)."""
    bits = (BYTES[None, :, None] >> np.arange(8)[None, None, :]) & 1
    return np.sum(bits << tables[:, None, :], axis=2)


def _unpermute(values: np.ndarray, tables: np.ndarray) -> np.ndarray:
    bits = (values[:, :, None] >> tables[:, None, :]) & 1
    return np.sum(bits << np.arange(8)[None, None, :], axis=2)


def _check(name: str, cases: int, failures: int) -> SelfTestCheck:
    check = SelfTestCheck(name=name, passed=failures == 0, cases=cases, failures=failures)
    logger.info(f"Selftest {name}: {cases - failures}/{cases} passed")
    return check


def check_substitution() -> SelfTestCheck:
    u, v = np.meshgrid(BYTES, BYTES, indexing="ij")
    failures = int(np.count_nonzero((u ^ v) ^ v != u))
    failures += int(np.count_nonzero((((u + v) & 0xFF) - v) & 0xFF != u))
    return _check("substitution inverse", 2 * 256 * 256, failures)


def _check_tables(name: str, tables: np.ndarray) -> SelfTestCheck:
    forward = _permute(tables)
    back = _unpermute(forward, tables)
    failures = int(np.count_nonzero(back != BYTES[None, :]))
    return _check(name, forward.size, failures)


def check_cross() -> List[SelfTestCheck]:
    configs = np.arange(256)
    return [
        _check_tables(f"cross inverse {m1},{m2}", bit_tables(PermKind.CROSS, configs, (m1, m2)))
        for m1, m2 in CROSS_STAGE_PAIRS
    ]


def check_socek(seed: int = 0) -> SelfTestCheck:
    controls = np.random.default_rng(seed).integers(0, 1 << 16, size=SOCEK_SAMPLES)
    return _check_tables("socek inverse", bit_tables(PermKind.SOCEK, controls))


def check_bijectivity() -> SelfTestCheck:
    failures = 0
    cases = 0
    for params in (ArnoldParams(), StandardMapParams()):
        for n in GRID_SIDES:
            cases += 1
            try:
                perm = build_permutation(params, n)
            except ToolkitError as exc:
                logger.error(f"{params.kind} on {n}x{n}: {exc.detail}")
                failures += 1
                continue
            if not np.array_equal(np.sort(perm.forward), np.arange(n * n)):
                failures += 1
    return _check("grid permutation bijectivity", cases, failures)


def check_lfsr() -> SelfTestCheck:
    failures = sum(lfsr_period(LfsrConfig(degree=k)) != 2 ** k - 1 for k in (4, 8, 16))
    return _check("maximal-length LFSR", 3, failures)


def check_round_trip(size: int = 32) -> SelfTestCheck:
    img = natural_image(size, seed=1)
    failures = 0
    cases = 0
    for variant in Variant:
        for mode in (Mode.CBC, Mode.OFB, Mode.CFB, Mode.CTR):
            cases += 1
            cfg = CipherConfig(variant=variant, mode=mode)
            if decrypt_image(encrypt_image(img, SELFTEST_KEY, cfg), SELFTEST_KEY, cfg) != img:
                logger.error(f"Round trip failed for variant {variant.value} in {mode.value}")
                failures += 1
    return _check("cipher round trip", cases, failures)


def run_selftest() -> List[SelfTestCheck]:
    return [
        check_substitution(),
        *check_cross(),
        check_socek(),
        check_bijectivity(),
        check_lfsr(),
        check_round_trip(),
    ]
