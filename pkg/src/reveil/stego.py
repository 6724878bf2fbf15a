"""LSB-insertion steganography: channel bit algebra, self-describing
embedded header with CRC-32, and whole-region embed/extract.

Wire format: the 144-bit header (magic "SDID", version, bit depth k,
ROI rectangle, CRC-32 of the quantized payload) lives in the lowest bit
of each channel of the first 48 pixels of row 0, pixel order left to
right, channel order R, G, B, each field MSB-first. The payload sits
spatially aligned under the ROI: secret pixel (u, v) occupies the low
k bits of carrier pixel (roi.x + u, roi.y + v), per channel.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .imaging import ImageBuffer, Rect, DimensionMismatch

__all__ = [
    "MAGIC",
    "VERSION",
    "HEADER_BITS",
    "HEADER_PIXELS",
    "StegoHeader",
    "StegoError",
    "InvalidHeader",
    "NotStego",
    "UnsupportedVersion",
    "CrcMismatch",
    "MalformedRoi",
    "CarrierTooNarrow",
    "RoiTouchesHeaderRow",
    "combine_channel",
    "recover_secret_channel",
    "recover_carrier_channel",
    "crc32",
    "encode_header",
    "decode_header_bits",
    "embed",
    "extract",
]

MAGIC = b"SDID"
VERSION = 1

_HEADER_STRUCT = struct.Struct(">4sBBHHHHI")  # magic, version, k, x, y, w, h, crc
HEADER_BITS = _HEADER_STRUCT.size * 8  # 144
HEADER_PIXELS = HEADER_BITS // 3  # 48 pixels of row 0 carry the header


class StegoError(Exception):
    """Base class for stego codec failures."""


class InvalidHeader(StegoError):
    """Header fields violate their invariants (k range, roi placement)."""


class NotStego(StegoError):
    """Image does not carry the embedded magic."""


class UnsupportedVersion(StegoError):
    """Embedded header speaks a version this codec does not."""


class CrcMismatch(StegoError):
    """Payload does not match the CRC recorded at embed time."""


class MalformedRoi(StegoError):
    """Embedded ROI does not fit inside the stego image."""


class CarrierTooNarrow(StegoError):
    """Carrier must be at least 48 pixels wide to hold the header row."""


class RoiTouchesHeaderRow(StegoError):
    """ROI may not include row 0, which is reserved for the header."""


def _check_bit_depth(k: int) -> None:
    if not 1 <= k <= 7:
        raise ValueError(f"bit depth must be in [1, 7], got {k}")


def combine_channel(carrier, secret, k: int):
    """Merge one secret channel into one carrier channel at bit depth k.

    Keeps the carrier's top (8 - k) bits and replaces its low k bits
    with the secret's top k bits. Accepts ints or uint8 arrays.
    """
    _check_bit_depth(k)
    return (carrier & (0xFF ^ ((1 << k) - 1))) | (secret >> (8 - k))


def recover_secret_channel(stego, k: int):
    """Undo combine_channel for the hidden value: low k bits moved back
    to the top, the lost low (8 - k) bits filled with zeros."""
    _check_bit_depth(k)
    return (stego & ((1 << k) - 1)) << (8 - k)


def recover_carrier_channel(stego, k: int):
    """Undo combine_channel for the visible value: low k bits zeroed."""
    _check_bit_depth(k)
    return stego & (0xFF ^ ((1 << k) - 1))


def crc32(data: bytes) -> int:
    """Reflected CRC-32 (poly 0xEDB88320, init/final 0xFFFFFFFF)."""
    return zlib.crc32(data) & 0xFFFFFFFF


@dataclass(frozen=True)
class StegoHeader:
    """Self-describing record embedded alongside the payload."""

    k: int
    roi: Rect
    crc: int
    magic: bytes = MAGIC
    version: int = VERSION

    def __post_init__(self):
        if self.magic != MAGIC:
            raise InvalidHeader(f"magic must be {MAGIC!r}, got {self.magic!r}")
        if self.version != VERSION:
            raise InvalidHeader(f"version must be {VERSION}, got {self.version}")
        if not 1 <= self.k <= 7:
            raise InvalidHeader(f"bit depth must be in [1, 7], got {self.k}")
        if self.roi.y < 1:
            raise InvalidHeader("roi must not touch row 0 (reserved for the header)")
        for name in ("x", "y", "w", "h"):
            if getattr(self.roi, name) > 0xFFFF:
                raise InvalidHeader(f"roi.{name} does not fit in 16 bits")
        if not 0 <= self.crc <= 0xFFFFFFFF:
            raise InvalidHeader(f"crc does not fit in 32 bits: {self.crc:#x}")


def encode_header(h: StegoHeader) -> np.ndarray:
    """Serialize a header to its 144-bit wire form (uint8 array of 0/1)."""
    raw = _HEADER_STRUCT.pack(h.magic, h.version, h.k, h.roi.x, h.roi.y, h.roi.w, h.roi.h, h.crc)
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))


def decode_header_bits(bits: np.ndarray) -> StegoHeader:
    """Parse the 144-bit wire form back into a StegoHeader.

    Raises NotStego on a magic mismatch, UnsupportedVersion on an
    unknown version, InvalidHeader on out-of-range fields.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (HEADER_BITS,):
        raise ValueError(f"expected {HEADER_BITS} header bits, got shape {bits.shape}")
    raw = np.packbits(bits).tobytes()
    magic, version, k, x, y, w, h, crc = _HEADER_STRUCT.unpack(raw)
    if magic != MAGIC:
        raise NotStego(f"magic mismatch: {magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"version {version} (this codec speaks {VERSION})")
    if not 1 <= k <= 7:
        raise InvalidHeader(f"bit depth {k} out of range")
    if w < 1 or h < 1 or y < 1:
        raise InvalidHeader(f"roi ({x}, {y}, {w}, {h}) violates header invariants")
    return StegoHeader(k=k, roi=Rect(x, y, w, h), crc=crc)


def _quantized_payload(secret_px: np.ndarray, k: int) -> bytes:
    """Byte stream the CRC covers: the recoverable secret, row-major,
    channels R, G, B per pixel."""
    return (((secret_px >> (8 - k)) << (8 - k)).astype(np.uint8)).tobytes()


def embed(carrier: ImageBuffer, secret: ImageBuffer, roi: Rect, k: int) -> ImageBuffer:
    """Hide `secret` in `carrier` under `roi` at bit depth k.

    Returns the stego image: header in row 0's low bits, payload in the
    low k bits of every channel inside roi, all other pixels identical
    to the carrier.
    """
    _check_bit_depth(k)
    if carrier.width < HEADER_PIXELS:
        raise CarrierTooNarrow(
            f"carrier is {carrier.width} px wide; header needs {HEADER_PIXELS}"
        )
    if roi.y < 1:
        raise RoiTouchesHeaderRow("roi.y must be >= 1; row 0 is reserved")
    roi.validate_within(carrier.width, carrier.height)
    if (secret.width, secret.height) != (roi.w, roi.h):
        raise DimensionMismatch(
            f"secret is {secret.width}x{secret.height}, roi wants {roi.w}x{roi.h}"
        )

    crc = crc32(_quantized_payload(secret.pixels, k))
    header = StegoHeader(k=k, roi=roi, crc=crc)

    out = carrier.pixels.copy()
    bits = encode_header(header).reshape(HEADER_PIXELS, 3)
    out[0, :HEADER_PIXELS] = (out[0, :HEADER_PIXELS] & 0xFE) | bits
    out[roi.rows, roi.cols] = combine_channel(out[roi.rows, roi.cols], secret.pixels, k)
    return ImageBuffer(out)


def extract(stego: ImageBuffer) -> tuple[StegoHeader, ImageBuffer, ImageBuffer]:
    """Decode a stego image into (header, recovered secret, recovered carrier).

    The recovered secret has its lost low bits zero-filled; the
    recovered carrier is the full frame with the payload bits zeroed
    inside the roi (header bits in row 0 are left as written).
    """
    if stego.width < HEADER_PIXELS:
        raise NotStego(
            f"image is {stego.width} px wide; a header needs {HEADER_PIXELS}"
        )
    bits = (stego.pixels[0, :HEADER_PIXELS] & 1).reshape(-1)
    header = decode_header_bits(bits)
    roi = header.roi
    if roi.x + roi.w > stego.width or roi.y + roi.h > stego.height:
        raise MalformedRoi(
            f"embedded roi {roi} exceeds {stego.width}x{stego.height} image"
        )

    region = stego.pixels[roi.rows, roi.cols]
    secret_px = recover_secret_channel(region, header.k).astype(np.uint8)
    if crc32(secret_px.tobytes()) != header.crc:
        raise CrcMismatch("payload does not match embedded CRC")

    carrier_px = stego.pixels.copy()
    carrier_px[roi.rows, roi.cols] = recover_carrier_channel(region, header.k)
    return header, ImageBuffer(secret_px), ImageBuffer(carrier_px)
