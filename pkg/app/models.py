from typing import Optional

import numpy as np
from pydantic import BaseModel, model_validator

from .schemas import MapParams, Mode, Variant


class ImageBuffer(BaseModel):
    """Channel-major image: data has shape (channels, height, width), dtype uint8."""

    data: np.ndarray
    orig_width: Optional[int] = None
    orig_height: Optional[int] = None

    class Config:
        arbitrary_types_allowed = True

    @model_validator(mode="after")
    def check_layout(self) -> "ImageBuffer":
        data = self.data
        if not isinstance(data, np.ndarray) or data.ndim != 3 or data.dtype != np.uint8:
            raise ValueError("image data must be a (channels, height, width) uint8 array")
        if data.shape[0] not in (1, 3):
            raise ValueError(f"images carry 1 or 3 channels, got {data.shape[0]}")
        if data.size == 0:
            raise ValueError("image is empty")
        if self.orig_width is None:
            self.orig_width = data.shape[2]
        if self.orig_height is None:
            self.orig_height = data.shape[1]
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return (
            self.data.shape == other.data.shape
            and self.orig_width == other.orig_width
            and self.orig_height == other.orig_height
            and bool(np.array_equal(self.data, other.data))
        )

    __hash__ = None

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def is_square(self) -> bool:
        return self.width == self.height

    def flat(self) -> np.ndarray:
        return np.ascontiguousarray(self.data).reshape(-1)

    def with_data(self, data: np.ndarray) -> "ImageBuffer":
        return ImageBuffer(data=data, orig_width=self.orig_width, orig_height=self.orig_height)

    def clone(self) -> "ImageBuffer":
        return self.with_data(self.data.copy())

    def padded_square(self) -> "ImageBuffer":
        if self.is_square:
            return self
        side = max(self.width, self.height)
        data = np.zeros((self.channels, side, side), dtype=np.uint8)
        data[:, :self.height, :self.width] = self.data
        return ImageBuffer(data=data, orig_width=self.width, orig_height=self.height)

    def cropped(self) -> "ImageBuffer":
        data = np.ascontiguousarray(self.data[:, :self.orig_height, :self.orig_width])
        return ImageBuffer(data=data)

    @classmethod
    def from_stream(cls, stream: np.ndarray, channels: int, height: int, width: int, **dims) -> "ImageBuffer":
        data = np.asarray(stream, dtype=np.uint8).reshape(channels, height, width)
        return cls(data=data, **dims)

    @classmethod
    def from_hwc(cls, array: np.ndarray) -> "ImageBuffer":
        array = np.asarray(array, dtype=np.uint8)
        if array.ndim == 2:
            array = array[:, :, None]
        return cls(data=np.ascontiguousarray(array.transpose(2, 0, 1)))

    def to_hwc(self) -> np.ndarray:
        if self.channels == 1:
            return self.data[0]
        return np.ascontiguousarray(self.data.transpose(1, 2, 0))


class GridPermutation(BaseModel):
    n: int
    forward: np.ndarray
    inverse: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        frozen = True

    @model_validator(mode="after")
    def check_tables(self) -> "GridPermutation":
        size = self.n * self.n
        if self.forward.shape != (size,) or self.inverse.shape != (size,):
            raise ValueError(f"permutation tables must hold {size} entries")
        if not np.array_equal(self.inverse[self.forward], np.arange(size)):
            raise ValueError("inverse table does not undo the forward table")
        self.forward.flags.writeable = False
        self.inverse.flags.writeable = False
        return self

    @classmethod
    def identity(cls, n: int) -> "GridPermutation":
        return cls(n=n, forward=np.arange(n * n), inverse=np.arange(n * n))


class CipherHeader(BaseModel):
    version: int = 1
    variant: Variant
    mode: Mode
    rounds: int
    segment_bits: int = 8
    iv: int
    width: int
    height: int
    channels: int
    orig_width: int
    orig_height: int
    map_params: Optional[MapParams] = None

    @property
    def body_length(self) -> int:
        return self.width * self.height * self.channels


class CipherText(BaseModel):
    header: CipherHeader
    body: bytes

    def as_image(self) -> ImageBuffer:
        """The body viewed as the scrambled, padded image it encrypts."""
        header = self.header
        stream = np.frombuffer(self.body, dtype=np.uint8)
        return ImageBuffer.from_stream(stream, header.channels, header.height, header.width)
