"""Core image type, uncompressed 24-bit BMP codec, region ops and PSNR."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ImageBuffer",
    "Rect",
    "BmpError",
    "BadMagic",
    "UnsupportedFormat",
    "Truncated",
    "DimensionMismatch",
    "RectOutOfBounds",
    "decode_bmp",
    "encode_bmp",
    "psnr",
    "crop",
    "blit",
]


class BmpError(Exception):
    """Base class for BMP codec failures."""


class BadMagic(BmpError):
    """File does not start with the 'BM' signature."""


class UnsupportedFormat(BmpError):
    """Valid BMP, but not 24-bit uncompressed bottom-up BITMAPINFOHEADER."""


class Truncated(BmpError):
    """File ends before the declared pixel data does."""


class DimensionMismatch(ValueError):
    """Two images (or an image and a rect) disagree on dimensions."""


class RectOutOfBounds(ValueError):
    """Rect does not fit inside the image it is applied to."""


class ImageBuffer:
    """Immutable rectangular grid of 8-bit RGB pixels.

    Backed by a read-only ``(height, width, 3)`` uint8 array, top row
    first, channels in (r, g, b) order. All operations in this package
    return new buffers; the backing array is never mutated.
    """

    __slots__ = ("_px",)

    def __init__(self, pixels: np.ndarray):
        px = np.asarray(pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) pixel array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        px = px.copy()
        px.setflags(write=False)
        self._px = px

    @classmethod
    def filled(cls, width: int, height: int, color: tuple[int, int, int] = (0, 0, 0)) -> "ImageBuffer":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:, :] = color
        return cls(px)

    @property
    def width(self) -> int:
        return self._px.shape[1]

    @property
    def height(self) -> int:
        return self._px.shape[0]

    @property
    def pixels(self) -> np.ndarray:
        """Read-only (height, width, 3) uint8 view of the pixel data."""
        return self._px

    def pixel(self, x: int, y: int) -> tuple[int, int, int]:
        r, g, b = self._px[y, x]
        return (int(r), int(g), int(b))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self._px.shape == other._px.shape and bool(np.array_equal(self._px, other._px))

    def __ne__(self, other: object) -> bool:
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __repr__(self) -> str:
        return f"ImageBuffer({self.width}x{self.height})"


@dataclass(frozen=True)
class Rect:
    """Integer pixel region: columns [x, x+w), rows [y, y+h)."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError(f"rect origin must be non-negative, got ({self.x}, {self.y})")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"rect size must be positive, got {self.w}x{self.h}")

    def validate_within(self, width: int, height: int) -> None:
        if self.x + self.w > width or self.y + self.h > height:
            raise RectOutOfBounds(
                f"rect {self} does not fit inside {width}x{height} image"
            )

    @property
    def rows(self) -> slice:
        return slice(self.y, self.y + self.h)

    @property
    def cols(self) -> slice:
        return slice(self.x, self.x + self.w)


# BMP layout: 14-byte file header + 40-byte BITMAPINFOHEADER, pixel rows
# bottom-up, BGR on disk, each row zero-padded to a 4-byte multiple.
_FILE_HEADER = struct.Struct("<2sIHHI")
_INFO_HEADER = struct.Struct("<IiiHHIIiiII")
_PIXEL_OFFSET = _FILE_HEADER.size + _INFO_HEADER.size  # 54
_PPM_96DPI = 2835  # pixels per metre at 96 dpi, the conventional filler


def _stride(width: int) -> int:
    return (3 * width + 3) & ~3


def encode_bmp(img: ImageBuffer) -> bytes:
    """Serialize to a 24-bit uncompressed BMP, bit-exact round trip with decode_bmp."""
    w, h = img.width, img.height
    stride = _stride(w)
    rows = np.zeros((h, stride), dtype=np.uint8)
    # top-first RGB in memory -> bottom-up BGR on disk
    rows[:, : 3 * w] = img.pixels[::-1, :, ::-1].reshape(h, 3 * w)
    file_size = _PIXEL_OFFSET + stride * h
    header = _FILE_HEADER.pack(b"BM", file_size, 0, 0, _PIXEL_OFFSET)
    info = _INFO_HEADER.pack(40, w, h, 1, 24, 0, stride * h, _PPM_96DPI, _PPM_96DPI, 0, 0)
    return header + info + rows.tobytes()


def decode_bmp(data: bytes) -> ImageBuffer:
    """Parse a 24-bit uncompressed bottom-up BMP into an ImageBuffer.

    Raises BadMagic, UnsupportedFormat or Truncated; anything this
    function accepts survives encode_bmp -> decode_bmp bit-for-bit.
    """
    if data[:2] != b"BM":
        raise BadMagic(f"not a BMP file (magic {data[:2]!r})")
    if len(data) < _PIXEL_OFFSET:
        raise Truncated(f"header needs {_PIXEL_OFFSET} bytes, file has {len(data)}")
    _, _, _, _, pixel_offset = _FILE_HEADER.unpack_from(data, 0)
    (
        info_size,
        width,
        height,
        _planes,
        bpp,
        compression,
        _image_size,
        _xppm,
        _yppm,
        _colors,
        _important,
    ) = _INFO_HEADER.unpack_from(data, _FILE_HEADER.size)
    if info_size != 40:
        raise UnsupportedFormat(f"unsupported info header size {info_size} (want 40)")
    if bpp != 24:
        raise UnsupportedFormat(f"unsupported bit depth {bpp} (want 24)")
    if compression != 0:
        raise UnsupportedFormat(f"unsupported compression {compression} (want 0)")
    if width < 1 or height < 1:
        # height < 0 would mean top-down row order, which we reject
        raise UnsupportedFormat(f"unsupported dimensions {width}x{height}")
    stride = _stride(width)
    needed = stride * height
    if pixel_offset + needed > len(data):
        raise Truncated(
            f"pixel data needs {needed} bytes at offset {pixel_offset}, file has {len(data)}"
        )
    rows = np.frombuffer(data, dtype=np.uint8, count=needed, offset=pixel_offset)
    rows = rows.reshape(height, stride)[:, : 3 * width]
    return ImageBuffer(rows.reshape(height, width, 3)[::-1, :, ::-1])


def psnr(a: ImageBuffer, b: ImageBuffer) -> float:
    """Peak signal-to-noise ratio in dB; math.inf for identical images.

    MSE is averaged over all 3 * width * height channel samples.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"cannot compare {a.width}x{a.height} with {b.width}x{b.height}"
        )
    diff = a.pixels.astype(np.int64) - b.pixels.astype(np.int64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def crop(img: ImageBuffer, r: Rect) -> ImageBuffer:
    """Copy the region r out of img."""
    r.validate_within(img.width, img.height)
    return ImageBuffer(img.pixels[r.rows, r.cols])


def blit(dst: ImageBuffer, r: Rect, src: ImageBuffer) -> ImageBuffer:
    """Return dst with region r replaced by src; everything else untouched."""
    r.validate_within(dst.width, dst.height)
    if (src.width, src.height) != (r.w, r.h):
        raise DimensionMismatch(
            f"source is {src.width}x{src.height}, rect wants {r.w}x{r.h}"
        )
    out = dst.pixels.copy()
    out[r.rows, r.cols] = src.pixels
    return ImageBuffer(out)
