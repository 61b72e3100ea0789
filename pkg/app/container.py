import logging
import struct
from pathlib import Path
from typing import Optional, Tuple, Union

from .errors import HeaderMismatchError, TruncatedDataError
from .imageio import write_atomic
from .models import CipherHeader, CipherText
from .schemas import ArnoldParams, MapParams, Mode, SineConvention, StandardMapParams, Variant

logger = logging.getLogger(__name__)

MAGIC = b"CBS1"
VERSION = 1

# magic, version, variant, mode, rounds, s, iv, width, height, channels, orig width, orig height
_HEADER = struct.Struct("<4sBBBBBBIIBII")
_ARNOLD = struct.Struct("<III")
_STANDARD = struct.Struct("<dIB")

VARIANT_CODES = {variant: code for code, variant in enumerate(Variant)}
MODE_CODES = {Mode.CBC: 0, Mode.OFB: 1, Mode.CFB: 2, Mode.CTR: 3}
CONVENTION_CODES = {SineConvention.CONVENTIONAL: 0, SineConvention.PAPER_LITERAL: 1}

TAG_NONE = 0
TAG_ARNOLD = 1
TAG_STANDARD = 2


def _decode_code(table: dict, code: int, what: str):
    for member, value in table.items():
        if value == code:
            return member
    raise HeaderMismatchError(f"unknown {what} code {code}")


def _encode_map(params: Optional[MapParams]) -> bytes:
    if params is None:
        return bytes([TAG_NONE])
    if isinstance(params, ArnoldParams):
        return bytes([TAG_ARNOLD]) + _ARNOLD.pack(params.t, params.q, params.iterations)
    return bytes([TAG_STANDARD]) + _STANDARD.pack(
        params.k, params.iterations, CONVENTION_CODES[params.sine_convention]
    )


def _take(payload: bytes, offset: int, size: int, what: str) -> bytes:
    if len(payload) < offset + size:
        raise TruncatedDataError(f"container ends inside the {what}")
    return payload[offset:offset + size]


def _decode_map(payload: bytes, offset: int) -> Tuple[Optional[MapParams], int]:
    tag = _take(payload, offset, 1, "map parameter tag")[0]
    offset += 1
    if tag == TAG_NONE:
        return None, offset
    if tag == TAG_ARNOLD:
        t, q, iterations = _ARNOLD.unpack(_take(payload, offset, _ARNOLD.size, "Arnold parameters"))
        return ArnoldParams(t=t, q=q, iterations=iterations), offset + _ARNOLD.size
    if tag == TAG_STANDARD:
        k, iterations, convention = _STANDARD.unpack(_take(payload, offset, _STANDARD.size, "Standard map parameters"))
        sine = _decode_code(CONVENTION_CODES, convention, "sine convention")
        return StandardMapParams(k=k, iterations=iterations, sine_convention=sine), offset + _STANDARD.size
    raise HeaderMismatchError(f"unknown map parameter tag {tag}")


def encode(ct: CipherText) -> bytes:
    h = ct.header
    head = _HEADER.pack(
        MAGIC, h.version, VARIANT_CODES[h.variant], MODE_CODES[h.mode], h.rounds, h.segment_bits, h.iv,
        h.width, h.height, h.channels, h.orig_width, h.orig_height,
    )
    return head + _encode_map(h.map_params) + ct.body


def decode(payload: bytes) -> CipherText:
    fields = _HEADER.unpack(_take(payload, 0, _HEADER.size, "fixed header"))
    magic, version, variant, mode, rounds, s, iv, width, height, channels, orig_width, orig_height = fields
    if magic != MAGIC:
        raise HeaderMismatchError(f"not a ciphertext container (magic {magic!r})")
    if version != VERSION:
        raise HeaderMismatchError(f"unsupported container version {version}")
    map_params, offset = _decode_map(payload, _HEADER.size)
    header = CipherHeader(
        version=version,
        variant=_decode_code(VARIANT_CODES, variant, "variant"),
        mode=_decode_code(MODE_CODES, mode, "mode"),
        rounds=rounds,
        segment_bits=s,
        iv=iv,
        width=width,
        height=height,
        channels=channels,
        orig_width=orig_width,
        orig_height=orig_height,
        map_params=map_params,
    )
    body = payload[offset:]
    if len(body) < header.body_length:
        raise TruncatedDataError(f"container body holds {len(body)} of {header.body_length} bytes")
    if len(body) > header.body_length:
        raise HeaderMismatchError(f"container body holds {len(body)} bytes, header declares {header.body_length}")
    return CipherText(header=header, body=body)


def write_ciphertext(ct: CipherText, path: Union[str, Path]) -> None:
    write_atomic(path, encode(ct))
    logger.info(f"Wrote {ct.header.variant.value}/{ct.header.mode.value} ciphertext to {path}")


def read_ciphertext(path: Union[str, Path]) -> CipherText:
    return decode(Path(path).read_bytes())
