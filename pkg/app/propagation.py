import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .cipher import StreamCipher, scramble
from .errors import DomainError
from .models import ImageBuffer
from .schemas import ChannelModel, ChaoticParameters, CipherConfig, ErrorPropagationReport, Mode, SecretKey
from .security import derive_parameters

logger = logging.getLogger(__name__)

BLOCK_BITS = 8
BIT_INVERSION = 0.5
_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _check_probability(p_e: float) -> None:
    if not 0.0 <= p_e <= 1.0:
        raise DomainError(f"bit error probability {p_e} outside [0, 1]")


def predict_output_error(mode: Mode, p_e: float, b: int = BLOCK_BITS) -> float:
    _check_probability(p_e)
    if b < 1:
        raise DomainError(f"block size must be at least one bit, got {b}")
    mode = Mode(mode)
    if mode in (Mode.OFB, Mode.CTR):
        return p_e
    randomised = BIT_INVERSION * (1.0 - (1.0 - p_e) ** b)
    if mode == Mode.ECB:
        return randomised
    return p_e * (1.0 - p_e) ** b + randomised


def block_error_probability(x: int, p_e: float, b: int = BLOCK_BITS) -> float:
    _check_probability(p_e)
    if not 0 <= x <= b:
        raise DomainError(f"error count {x} outside 0..{b}")
    return float(stats.binom.pmf(x, b, p_e))


def simulate_channel(body: np.ndarray, ch: ChannelModel) -> np.ndarray:
    """Binary symmetric channel: every bit flips independently with probability p_e."""
    body = np.ascontiguousarray(body, dtype=np.uint8)
    flips = np.random.default_rng(ch.seed).random(body.size * 8) < ch.p_e
    return body ^ np.packbits(flips)


class PropagationBench:
    """One encrypted stream, ready for repeated corruption and decryption."""

    def __init__(self, params: ChaoticParameters, cfg: CipherConfig, img: ImageBuffer, mode: Optional[Mode] = None):
        self.cfg = cfg
        self.mode = Mode(mode or cfg.mode)
        self.scrambled = scramble(img.padded_square(), cfg)
        self.plain = self.scrambled.flat()
        self.engine = StreamCipher(params, cfg)
        self.cipher = self.engine.encrypt(self.plain, self.mode)

    @property
    def bits(self) -> int:
        return self.plain.size * 8

    def error_counts(self, corrupted: np.ndarray) -> np.ndarray:
        decrypted = self.engine.decrypt(corrupted, self.mode)
        return _POPCOUNT[decrypted ^ self.plain]

    def stream_position(self, row: int, col: int, channel: int) -> int:
        """1-based (row, column, channel) on the cipher grid to a stream offset."""
        img = self.scrambled
        if not (1 <= row <= img.height and 1 <= col <= img.width and 1 <= channel <= img.channels):
            raise DomainError(f"flip ({row}, {col}, {channel}) outside the {img.height}x{img.width}x{img.channels} grid")
        return ((channel - 1) * img.height + row - 1) * img.width + col - 1

    def forced_flip(self, row: int, col: int, channel: int) -> int:
        corrupted = self.cipher.copy()
        corrupted[self.stream_position(row, col, channel)] ^= 1
        blocks = int(np.count_nonzero(self.error_counts(corrupted)))
        logger.info(f"Flip at ({row}, {col}, {channel}) in {self.mode.value}: {blocks} erroneous blocks")
        return blocks

    def bit_inversion(self, corrupted: np.ndarray) -> Optional[float]:
        """Fraction of primitive output bits that change when its input block is corrupted."""
        if self.mode in (Mode.OFB, Mode.CTR):
            return None
        hit = corrupted != self.cipher
        if not hit.any():
            return None
        # CFB decryption runs the primitive forward
        primitive = self.engine.encrypt if self.mode == Mode.CFB else self.engine.decrypt
        # round material is indexed by stream position, so run over the whole stream
        before = primitive(self.cipher, Mode.ECB)[hit]
        after = primitive(corrupted, Mode.ECB)[hit]
        return float(_POPCOUNT[before ^ after].sum() / (8 * hit.sum()))

    def trial(self, ch: ChannelModel) -> Tuple[np.ndarray, Optional[float]]:
        corrupted = simulate_channel(self.cipher, ch)
        return self.error_counts(corrupted), self.bit_inversion(corrupted)


def _report(
    mode: Mode, ch: ChannelModel, b: int, counts: np.ndarray, inversions: List[float], blocks: List[int], trials: int
) -> ErrorPropagationReport:
    predicted = predict_output_error(mode, ch.p_e, b)
    n = counts.size
    measured = float(counts.sum() / (8 * n))
    binomial_se = math.sqrt(predicted * (1.0 - predicted) / (8 * n))
    block_se = float(counts.std(ddof=1) / (8 * math.sqrt(n))) if n > 1 else 0.0
    return ErrorPropagationReport(
        mode=mode,
        b=b,
        p_e=ch.p_e,
        predicted=predicted,
        measured=measured,
        sample_bits=8 * n,
        binomial_se=binomial_se,
        block_se=block_se,
        bit_inversion=float(np.mean(inversions)) if inversions else None,
        erroneous_blocks=blocks,
        seed=ch.seed,
        trials=trials,
    )


def measure_error_propagation(
    key: SecretKey,
    cfg: CipherConfig,
    img: ImageBuffer,
    ch: ChannelModel,
    mode: Optional[Mode] = None,
    flips: Sequence[Tuple[int, int, int]] = (),
    b: int = BLOCK_BITS,
) -> ErrorPropagationReport:
    bench = PropagationBench(derive_parameters(key), cfg, img, mode)
    blocks = [bench.forced_flip(*flip) for flip in flips]
    counts, inversion = bench.trial(ch)
    report = _report(bench.mode, ch, b, counts, [inversion] if inversion is not None else [], blocks, 1)
    logger.info(
        f"Error propagation {bench.mode.value} at p_e={ch.p_e:g}: "
        f"predicted {report.predicted:.6f}, measured {report.measured:.6f}"
    )
    return report


def monte_carlo(
    key: SecretKey,
    cfg: CipherConfig,
    img: ImageBuffer,
    ch: ChannelModel,
    trials: int = 4,
    mode: Optional[Mode] = None,
    flips: Sequence[Tuple[int, int, int]] = (),
    b: int = BLOCK_BITS,
) -> ErrorPropagationReport:
    """Independent channel realisations from spawned seeds, merged in trial order."""
    if trials < 1:
        raise DomainError(f"need at least one trial, got {trials}")
    bench = PropagationBench(derive_parameters(key), cfg, img, mode)
    blocks = [bench.forced_flip(*flip) for flip in flips]
    children = np.random.SeedSequence(ch.seed).spawn(trials)
    counts, inversions = [], []
    for index, child in enumerate(children):
        trial_seed = int(child.generate_state(1)[0])
        trial_counts, inversion = bench.trial(ChannelModel(p_e=ch.p_e, seed=trial_seed))
        counts.append(trial_counts)
        if inversion is not None:
            inversions.append(inversion)
        logger.debug(f"Trial {index}: {int(trial_counts.sum())} bit errors")
    report = _report(bench.mode, ch, b, np.concatenate(counts), inversions, blocks, trials)
    logger.info(
        f"Monte Carlo {bench.mode.value} over {trials} trials at p_e={ch.p_e:g}: "
        f"predicted {report.predicted:.6f}, measured {report.measured:.6f} (se {max(report.binomial_se, report.block_se):.2e})"
    )
    return report
