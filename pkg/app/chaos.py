import logging
import math
from typing import Optional, Tuple

import numba as nb
import numpy as np

from .errors import ConfigError, DomainError
from .schemas import CycleMeasurement, FixedPointValue, LfsrConfig, PwlcmParams

logger = logging.getLogger(__name__)

WORD_BITS = 32
MIN_WORD_BITS = 8


def pwlcm_step(x: float, params: PwlcmParams) -> float:
    if not 0.0 <= x < 1.0:
        raise DomainError(f"PWLCM state {x} outside [0, 1)")
    p = params.p
    if x >= 0.5:
        x = 1.0 - x
    if x < p:
        return x / p
    y = (x - p) / (0.5 - p)
    return y if y < 1.0 else 0.0


def discretize(x: float) -> FixedPointValue:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"cannot discretize {x}: outside [0, 1]")
    raw = math.floor(x * 2 ** WORD_BITS + 0.5)
    return FixedPointValue(raw=raw & (2 ** WORD_BITS - 1))


@nb.njit(cache=True, nogil=True)
def _scaled_quotient(a, d, word_bits):
    # floor(a * 2^W / d) for 0 <= a <= d <= 2^W without leaving int64
    hi = a >> 1
    lo = a & 1
    num = hi << word_bits
    q = num // d
    r = num - q * d
    return 2 * q + (2 * r + (lo << word_bits)) // d


@nb.njit(cache=True, nogil=True)
def _pwlcm_fixed(raw, p_raw, word_bits):
    full = 1 << word_bits
    if raw >= full >> 1:
        raw = full - raw
    x2 = raw << 1
    if x2 < p_raw:
        out = _scaled_quotient(x2, p_raw, word_bits)
    else:
        out = _scaled_quotient(x2 - p_raw, full - p_raw, word_bits)
    return out & (full - 1)


@nb.njit(cache=True, nogil=True)
def _parity(v):
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


@nb.njit(cache=True, nogil=True)
def _lfsr_advance(reg, taps, degree):
    return (reg >> 1) | (_parity(reg & taps) << (degree - 1))


@nb.njit(cache=True, nogil=True)
def _lfsr_period(seed, taps, degree, limit):
    reg = _lfsr_advance(seed, taps, degree)
    count = 1
    while reg != seed:
        reg = _lfsr_advance(reg, taps, degree)
        count += 1
        if count > limit:
            return -1
    return count


@nb.njit(cache=True, nogil=True)
def _orbit_fill(out, x, reg, n, p_raw, word_bits, degree, taps, delta, perturb):
    low = (1 << degree) - 1
    for i in range(out.shape[0]):
        y = _pwlcm_fixed(x, p_raw, word_bits)
        if perturb and n % delta == 0:
            y ^= reg & low
            reg = _lfsr_advance(reg, taps, degree)
        out[i] = y
        x = y
        n += 1
    return x, reg, n


@nb.njit(cache=True, nogil=True)
def _combined_step(x, reg, phase, p_raw, word_bits, degree, taps, delta, perturb):
    y = _pwlcm_fixed(x, p_raw, word_bits)
    if perturb and phase == 0:
        y ^= reg & ((1 << degree) - 1)
        reg = _lfsr_advance(reg, taps, degree)
    phase += 1
    if phase == delta:
        phase = 0
    return y, reg, phase


@nb.njit(cache=True, nogil=True)
def _brent_cycle(x0, reg0, phase0, p_raw, word_bits, degree, taps, delta, perturb, limit):
    power = 1
    period = 1
    tx, tr, tp = x0, reg0, phase0
    hx, hr, hp = _combined_step(x0, reg0, phase0, p_raw, word_bits, degree, taps, delta, perturb)
    steps = 1
    while tx != hx or tr != hr or tp != hp:
        if power == period:
            tx, tr, tp = hx, hr, hp
            power *= 2
            period = 0
        hx, hr, hp = _combined_step(hx, hr, hp, p_raw, word_bits, degree, taps, delta, perturb)
        period += 1
        steps += 1
        if steps > limit:
            return -1, -1
    tx, tr, tp = x0, reg0, phase0
    hx, hr, hp = x0, reg0, phase0
    for _ in range(period):
        hx, hr, hp = _combined_step(hx, hr, hp, p_raw, word_bits, degree, taps, delta, perturb)
    transient = 0
    while tx != hx or tr != hr or tp != hp:
        tx, tr, tp = _combined_step(tx, tr, tp, p_raw, word_bits, degree, taps, delta, perturb)
        hx, hr, hp = _combined_step(hx, hr, hp, p_raw, word_bits, degree, taps, delta, perturb)
        transient += 1
    return transient, period


def pwlcm_step_fixed(raw: int, params: PwlcmParams, word_bits: int = WORD_BITS) -> int:
    if not 0 <= raw < 2 ** word_bits:
        raise DomainError(f"fixed-point state {raw} outside {word_bits}-bit range")
    return int(_pwlcm_fixed(raw, params.raw(word_bits), word_bits))


def lfsr_next(register: int, taps: int, degree: int) -> Tuple[int, int]:
    """One Fibonacci step. Returns the k perturbing bits of this epoch and the next register."""
    if register == 0:
        raise DomainError("LFSR register is all-zero; the zero state is a degenerate cycle")
    if not 0 < register < 2 ** degree:
        raise DomainError(f"register {register:#x} wider than {degree} bits")
    return register, int(_lfsr_advance(register, taps, degree))


def lfsr_period(cfg: LfsrConfig) -> int:
    seed = cfg.initial_state if cfg.initial_state is not None else 1
    return int(_lfsr_period(seed, cfg.taps, cfg.degree, 2 ** cfg.degree))


def min_cycle_length(cfg: LfsrConfig) -> int:
    return cfg.delta * (2 ** cfg.degree - 1)


class PerturbedOrbit:
    """PWLCM trajectory iterated in fixed point, perturbed by an LFSR every `delta` steps."""

    def __init__(
        self,
        params: PwlcmParams,
        x0: FixedPointValue,
        lfsr: Optional[LfsrConfig] = None,
        word_bits: int = WORD_BITS,
    ):
        if not MIN_WORD_BITS <= word_bits <= WORD_BITS:
            raise ConfigError(f"orbit word size must be {MIN_WORD_BITS}..{WORD_BITS} bits, got {word_bits}")
        self.params = params
        self.word_bits = word_bits
        self.lfsr = lfsr
        self._p_raw = params.raw(word_bits)
        if lfsr is not None:
            if lfsr.degree > word_bits:
                raise ConfigError(f"LFSR degree {lfsr.degree} exceeds the {word_bits}-bit orbit word")
            if lfsr.initial_state is None:
                raise ConfigError("a perturbed orbit needs a seeded LFSR register")
            self.register = lfsr.initial_state
        else:
            self.register = 0
        self.state = x0.raw >> (WORD_BITS - word_bits)
        self.n = 0

    def _kernel_args(self):
        if self.lfsr is None:
            return self._p_raw, self.word_bits, 1, 0, 1, False
        return self._p_raw, self.word_bits, self.lfsr.degree, self.lfsr.taps, self.lfsr.delta, True

    @property
    def value(self) -> FixedPointValue:
        return FixedPointValue(raw=self.state << (WORD_BITS - self.word_bits))

    def generate(self, count: int) -> np.ndarray:
        if count < 0:
            raise DomainError(f"cannot generate {count} orbit values")
        out = np.empty(count, dtype=np.int64)
        if count:
            self.state, self.register, self.n = (
                int(v) for v in _orbit_fill(out, self.state, self.register, self.n, *self._kernel_args())
            )
        return out

    def next(self) -> int:
        return int(self.generate(1)[0])

    def measure_cycle(self, limit: int = 1 << 30) -> CycleMeasurement:
        """Brent cycle detection over (state, register, n mod delta) from the current position."""
        p_raw, word_bits, degree, taps, delta, perturb = self._kernel_args()
        transient, period = _brent_cycle(
            self.state, self.register, self.n % delta, p_raw, word_bits, degree, taps, delta, perturb, limit
        )
        if period < 0:
            raise DomainError(f"no repeated orbit state within {limit} steps")
        logger.info(f"Orbit cycle at {self.word_bits} bits: transient {transient}, period {period}")
        return CycleMeasurement(transient=int(transient), period=int(period))


def perturbed_next(orbit: PerturbedOrbit) -> FixedPointValue:
    orbit.next()
    return orbit.value
