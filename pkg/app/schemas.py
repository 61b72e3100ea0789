import math
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from .errors import DomainError


class Variant(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"


class Mode(str, Enum):
    CBC = "cbc"
    OFB = "ofb"
    CFB = "cfb"
    CTR = "ctr"
    ECB = "ecb"


class PermKind(str, Enum):
    SOCEK = "socek"
    CROSS = "cross"


class MapKind(str, Enum):
    ARNOLD = "arnold"
    STANDARD = "standard"


class SineConvention(str, Enum):
    CONVENTIONAL = "conventional"
    PAPER_LITERAL = "paper_literal"


class Direction(str, Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


class Adjacency(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    DIAGONAL = "diagonal"


class BitstreamFormat(str, Enum):
    RAW = "raw"
    ASCII = "ascii"


class ParameterName(str, Enum):
    ALPHA = "alpha"
    BETA = "beta"
    X0 = "x0"
    Y0 = "y0"


CROSS_STAGES = (1, 2, 4)
DEFAULT_CROSS_STAGES = (1, 4)

# Fibonacci tap masks: primitive polynomial without its leading term, bit t <-> x^t.
LFSR_TAPS = {
    4: (0x3, 0x9),
    8: (0x71, 0x1D),
    16: (0x6801, 0x002D),
    32: (0x00400007,),
}

VARIANT_MAPS = {
    Variant.A: MapKind.STANDARD,
    Variant.B: MapKind.STANDARD,
    Variant.C: MapKind.ARNOLD,
    Variant.D: MapKind.ARNOLD,
    Variant.E: None,
}

VARIANT_PERMS = {
    Variant.A: PermKind.SOCEK,
    Variant.B: PermKind.CROSS,
    Variant.C: PermKind.SOCEK,
    Variant.D: PermKind.CROSS,
    Variant.E: PermKind.SOCEK,
}


class PwlcmParams(BaseModel):
    p: float = Field(..., gt=0.0, lt=0.5)

    class Config:
        frozen = True

    def raw(self, word_bits: int = 32) -> int:
        """Control parameter in fixed point with one extra fractional bit (unit 2^-(W+1))."""
        raw = math.floor(self.p * 2 ** (word_bits + 1) + 0.5)
        if not 0 < raw < 2 ** word_bits:
            raise DomainError(f"p={self.p} is not representable at {word_bits}-bit precision")
        return raw

    @classmethod
    def from_raw(cls, raw: int, word_bits: int = 32) -> "PwlcmParams":
        return cls(p=raw / 2 ** (word_bits + 1))


class FixedPointValue(BaseModel):
    raw: int = Field(..., ge=0, lt=2 ** 32)

    class Config:
        frozen = True

    @property
    def value(self) -> float:
        return self.raw / 2 ** 32


class LfsrConfig(BaseModel):
    degree: int = 32
    taps: Optional[int] = None
    initial_state: Optional[int] = None
    delta: int = Field(1, ge=1)

    @model_validator(mode="after")
    def check_polynomial(self) -> "LfsrConfig":
        if self.degree not in LFSR_TAPS:
            raise ValueError(f"LFSR degree must be one of {sorted(LFSR_TAPS)}, got {self.degree}")
        if self.taps is None:
            self.taps = LFSR_TAPS[self.degree][0]
        elif self.taps not in LFSR_TAPS[self.degree]:
            raise ValueError(f"taps {self.taps:#x} are not a known primitive polynomial of degree {self.degree}")
        if self.initial_state is not None and not 0 < self.initial_state < 2 ** self.degree:
            raise ValueError(f"LFSR initial state must be a non-zero {self.degree}-bit value")
        return self


class ArnoldParams(BaseModel):
    kind: Literal["arnold"] = "arnold"
    t: int = Field(1, ge=1)
    q: int = Field(1, ge=1)
    iterations: int = Field(3, ge=1)

    class Config:
        frozen = True

    @property
    def matrix(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return (1, self.t), (self.q, self.t * self.q + 1)

    @property
    def determinant(self) -> int:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    @model_validator(mode="after")
    def check_area_preserving(self) -> "ArnoldParams":
        if self.determinant != 1:
            raise ValueError(f"Arnold matrix {self.matrix} has determinant {self.determinant}, expected 1")
        return self


class StandardMapParams(BaseModel):
    kind: Literal["standard"] = "standard"
    k: float = Field(1000.0, gt=0.0)
    iterations: int = Field(3, ge=1)
    sine_convention: SineConvention = SineConvention.CONVENTIONAL

    class Config:
        frozen = True


MapParams = Annotated[Union[ArnoldParams, StandardMapParams], Field(discriminator="kind")]


class BitPermutation(BaseModel):
    perm: Tuple[int, ...]

    class Config:
        frozen = True

    @field_validator("perm")
    @classmethod
    def check_degree(cls, perm: Tuple[int, ...]) -> Tuple[int, ...]:
        if sorted(perm) != list(range(8)):
            raise ValueError(f"{perm} is not a permutation of 0..7")
        return perm

    @classmethod
    def identity(cls) -> "BitPermutation":
        return cls(perm=tuple(range(8)))

    @classmethod
    def from_one_based(cls, perm: List[int]) -> "BitPermutation":
        return cls(perm=tuple(index - 1 for index in perm))

    def inverse(self) -> "BitPermutation":
        inverse = [0] * 8
        for source, dest in enumerate(self.perm):
            inverse[dest] = source
        return BitPermutation(perm=tuple(inverse))


class RoundSubKeys(BaseModel):
    c: Tuple[int, int, int, int]

    class Config:
        frozen = True

    @field_validator("c")
    @classmethod
    def check_bytes(cls, c: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(not 0 <= byte <= 0xFF for byte in c):
            raise ValueError("round subkeys must be bytes")
        return c


class PermControl(BaseModel):
    kind: PermKind
    socek_bits: Optional[int] = Field(None, ge=0, le=0xFFFF)
    cross_cfg: Optional[int] = Field(None, ge=0, le=0xFF)
    stages: Tuple[int, int] = DEFAULT_CROSS_STAGES

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_populated(self) -> "PermControl":
        if self.kind == PermKind.SOCEK and (self.socek_bits is None or self.cross_cfg is not None):
            raise ValueError("a Socek control carries socek_bits only")
        if self.kind == PermKind.CROSS and (self.cross_cfg is None or self.socek_bits is not None):
            raise ValueError("a Cross control carries cross_cfg only")
        return self


class SecretKey(BaseModel):
    bits: bytes = Field(..., min_length=16, max_length=16)

    class Config:
        frozen = True

    def __repr__(self) -> str:
        return "SecretKey(<128 bits>)"

    @property
    def words(self) -> Tuple[int, int, int, int]:
        return tuple(int.from_bytes(self.bits[i:i + 4], "big") for i in range(0, 16, 4))

    def flip_bit(self, index: int) -> "SecretKey":
        """Bit 0 is the least-significant bit of the key read as a big-endian integer."""
        if not 0 <= index < 128:
            raise DomainError(f"key bit index {index} outside 0..127")
        value = int.from_bytes(self.bits, "big") ^ (1 << index)
        return SecretKey(bits=value.to_bytes(16, "big"))


class CipherConfig(BaseModel):
    variant: Variant = Variant.A
    mode: Mode = Mode.OFB
    rounds: int = Field(4, ge=4, le=252)
    cfb_segment_bits: int = Field(8, ge=1, le=8)
    map_params: Optional[MapParams] = None
    cross_stages: Tuple[int, int] = DEFAULT_CROSS_STAGES
    lfsr: LfsrConfig = Field(default_factory=LfsrConfig)
    iv: Optional[int] = Field(None, ge=0, le=255)

    @field_validator("rounds")
    @classmethod
    def check_rounds(cls, rounds: int) -> int:
        if rounds % 4:
            raise ValueError(f"rounds must be a multiple of 4, got {rounds}")
        return rounds

    @field_validator("mode")
    @classmethod
    def check_mode(cls, mode: Mode) -> Mode:
        if mode == Mode.ECB:
            raise ValueError("ECB is only available to the error-propagation analysis")
        return mode

    @field_validator("cross_stages")
    @classmethod
    def check_stages(cls, stages: Tuple[int, int]) -> Tuple[int, int]:
        if any(stage not in CROSS_STAGES for stage in stages):
            raise ValueError(f"Cross stage distances must be in {CROSS_STAGES}, got {stages}")
        return stages

    @model_validator(mode="after")
    def check_variant(self) -> "CipherConfig":
        expected = VARIANT_MAPS[self.variant]
        if expected is None:
            if self.map_params is not None:
                raise ValueError("variant E does not scramble pixel positions; drop map_params")
        elif self.map_params is None:
            self.map_params = ArnoldParams() if expected == MapKind.ARNOLD else StandardMapParams()
        elif self.map_params.kind != expected.value:
            raise ValueError(f"variant {self.variant.value} requires {expected.value} map parameters")
        return self

    @property
    def perm_kind(self) -> PermKind:
        return VARIANT_PERMS[self.variant]


class ChaoticParameters(BaseModel):
    alpha: PwlcmParams
    beta: PwlcmParams
    x0: FixedPointValue
    y0: FixedPointValue
    lfsr_seed: int = Field(..., ge=1, lt=2 ** 32)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_seeds(self) -> "ChaoticParameters":
        if self.x0.raw == 0 or self.y0.raw == 0:
            raise ValueError("orbit initial values must be non-zero")
        return self


class ChannelModel(BaseModel):
    p_e: float = Field(..., ge=0.0, le=1.0)
    seed: int = 0


class KeyDelta(BaseModel):
    key_bit: Optional[int] = Field(None, ge=0, lt=128)
    parameter: Optional[ParameterName] = None
    delta: float = 0.0

    @model_validator(mode="after")
    def check_target(self) -> "KeyDelta":
        if (self.key_bit is None) == (self.parameter is None):
            raise ValueError("a key delta perturbs exactly one key bit or one derived parameter")
        return self


class CycleMeasurement(BaseModel):
    transient: int
    period: int

    @property
    def pre_repeat_length(self) -> int:
        return self.transient + self.period


class ErrorPropagationReport(BaseModel):
    mode: Mode
    b: int = 8
    p_e: float
    predicted: float
    measured: float = Field(..., ge=0.0, le=1.0)
    sample_bits: int = Field(..., gt=0)
    binomial_se: float
    block_se: float
    bit_inversion: Optional[float] = None
    erroneous_blocks: List[int] = []
    seed: int = 0
    trials: int = 1

    def agrees(self, sigmas: float = 3.0) -> bool:
        scale = max(self.binomial_se, self.block_se)
        return abs(self.measured - self.predicted) <= sigmas * scale


class Correlation(BaseModel):
    direction: Adjacency
    r: List[float]
    degenerate: List[bool]
    pairs: int


class Histogram(BaseModel):
    counts: List[List[int]]
    chi2: List[float]
    p_values: List[float]
    critical_value: float

    @property
    def uniform(self) -> List[bool]:
        return [stat < self.critical_value for stat in self.chi2]


class StatReport(BaseModel):
    entropy: List[float]
    correlation: List[Correlation]
    histogram: Histogram
    npcr: Optional[float] = Field(None, ge=0.0, le=100.0)
    uaci: Optional[float] = Field(None, ge=0.0, le=100.0)
    samples: Optional[int] = None
    seed: int = 0


class SensitivityReport(BaseModel):
    npcr: float = Field(..., ge=0.0, le=100.0)
    uaci: float = Field(..., ge=0.0, le=100.0)
    npcr_per_channel: List[float]
    uaci_per_channel: List[float]
    changed_blocks: int
    npcr_onward: Optional[float] = None
    uaci_onward: Optional[float] = None


class PermutationCorrelation(BaseModel):
    kind: MapKind
    iterations: int
    correlation: List[Correlation]


CHANNEL_NAMES = ("r", "g", "b")
DIRECTION_KEYS = {Adjacency.HORIZONTAL: "h", Adjacency.VERTICAL: "v", Adjacency.DIAGONAL: "d"}


class AnalysisReport(BaseModel):
    stats: Optional[StatReport] = None
    propagation: Optional[ErrorPropagationReport] = None
    sensitivity: Optional[SensitivityReport] = None
    permutation: List[PermutationCorrelation] = []

    def flat(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        if self.stats is not None:
            stats = self.stats
            for name, value in zip(CHANNEL_NAMES, stats.entropy):
                out[f"entropy.{name}"] = value
            for corr in stats.correlation:
                key = DIRECTION_KEYS[corr.direction]
                for name, value, degenerate in zip(CHANNEL_NAMES, corr.r, corr.degenerate):
                    out[f"corr.{key}.{name}"] = value
                    if degenerate:
                        out[f"corr.{key}.{name}.degenerate"] = True
            if stats.npcr is not None:
                out["npcr"] = stats.npcr
                out["uaci"] = stats.uaci
            out["chi2"] = max(stats.histogram.chi2)
            for name, value, p_value in zip(CHANNEL_NAMES, stats.histogram.chi2, stats.histogram.p_values):
                out[f"chi2.{name}"] = value
                out[f"chi2.p.{name}"] = p_value
            out["chi2.critical"] = stats.histogram.critical_value
            out["seed"] = stats.seed
        if self.propagation is not None:
            ep = self.propagation
            out["ep.mode"] = ep.mode.value
            out["ep.pe"] = ep.p_e
            out["ep.predicted"] = ep.predicted
            out["ep.measured"] = ep.measured
            out["ep.se"] = max(ep.binomial_se, ep.block_se)
            out["ep.bits"] = ep.sample_bits
            out["ep.blocks"] = ",".join(str(count) for count in ep.erroneous_blocks)
            if ep.bit_inversion is not None:
                out["ep.ph"] = ep.bit_inversion
            out["ep.seed"] = ep.seed
            out["ep.trials"] = ep.trials
        if self.sensitivity is not None:
            sens = self.sensitivity
            out["npcr"] = sens.npcr
            out["uaci"] = sens.uaci
            for name, npcr, uaci in zip(CHANNEL_NAMES, sens.npcr_per_channel, sens.uaci_per_channel):
                out[f"npcr.{name}"] = npcr
                out[f"uaci.{name}"] = uaci
            out["blocks"] = sens.changed_blocks
            if sens.npcr_onward is not None:
                out["npcr.onward"] = sens.npcr_onward
                out["uaci.onward"] = sens.uaci_onward
        for study in self.permutation:
            for corr in study.correlation:
                key = DIRECTION_KEYS[corr.direction]
                for name, value in zip(CHANNEL_NAMES, corr.r):
                    out[f"perm.{study.kind.value}.it{study.iterations}.{key}.{name}"] = value
        return out


class SelfTestCheck(BaseModel):
    name: str
    passed: bool
    cases: int
    failures: int = 0
