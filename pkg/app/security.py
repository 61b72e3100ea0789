import logging
import math
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from .errors import DomainError, KeyFormatError
from .schemas import ChaoticParameters, FixedPointValue, LfsrConfig, ParameterName, PwlcmParams, SecretKey

logger = logging.getLogger(__name__)

KEY_BYTES = 16
CONTROL_FLOOR = 2 ** 13
STATE_FLOOR = 2 ** 12
CONTROL_UNIT = 2.0 ** -33
STATE_UNIT = 2.0 ** -32


def _clamp(value: int, floor: int) -> int:
    return min(max(value, floor), 2 ** 32 - floor)


def parse_key(text: str) -> SecretKey:
    digits = text.strip().lower()
    if digits.startswith("0x"):
        digits = digits[2:]
    if len(digits) != 2 * KEY_BYTES:
        raise KeyFormatError(f"key must be {2 * KEY_BYTES} hex digits, got {len(digits)}")
    try:
        return SecretKey(bits=bytes.fromhex(digits))
    except ValueError:
        raise KeyFormatError("key contains non-hex characters")


def load_key_file(path: Union[str, Path]) -> SecretKey:
    """A key file holds either 16 raw bytes or the key as hex text."""
    payload = Path(path).read_bytes()
    if len(payload) == KEY_BYTES:
        return SecretKey(bits=payload)
    try:
        text = payload.decode("ascii")
    except UnicodeDecodeError:
        raise KeyFormatError(f"{path}: neither 16 raw key bytes nor hex text")
    return parse_key(text)


def derive_parameters(key: SecretKey) -> ChaoticParameters:
    w1, w2, w3, w4 = key.words
    seed = (w3 ^ w4) or 1
    return ChaoticParameters(
        alpha=PwlcmParams.from_raw(_clamp(w1, CONTROL_FLOOR)),
        beta=PwlcmParams.from_raw(_clamp(w2, CONTROL_FLOOR)),
        x0=FixedPointValue(raw=_clamp(w3, STATE_FLOOR)),
        y0=FixedPointValue(raw=_clamp(w4, STATE_FLOOR)),
        lfsr_seed=seed,
    )


def seeded_lfsr(cfg: LfsrConfig, params: ChaoticParameters) -> LfsrConfig:
    if cfg.initial_state is not None:
        return cfg
    state = params.lfsr_seed & ((1 << cfg.degree) - 1)
    return cfg.model_copy(update={"initial_state": state or 1})


def perturb_parameter(params: ChaoticParameters, name: ParameterName, delta: float) -> ChaoticParameters:
    """Shift one derived parameter by delta, in its own fixed-point unit."""
    name = ParameterName(name)
    if delta == 0:
        return params
    is_control = name in (ParameterName.ALPHA, ParameterName.BETA)
    unit = CONTROL_UNIT if is_control else STATE_UNIT
    current = getattr(params, name.value)
    raw = current.raw() if is_control else current.raw
    shifted = math.floor((raw * unit + delta) / unit + 0.5)
    if shifted == raw:
        shifted = raw + int(math.copysign(1, delta))
        logger.warning(f"Delta {delta:g} on {name.value} is below the {unit:g} resolution; promoted to one unit")
    try:
        fields = dict(params)
        fields[name.value] = PwlcmParams.from_raw(shifted) if is_control else FixedPointValue(raw=shifted)
        return ChaoticParameters(**fields)
    except ValidationError:
        raise DomainError(f"{name.value} shifted by {delta:g} leaves its domain")
