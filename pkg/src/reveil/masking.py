"""Silhouette concealment: block pixelization and box blur over a rect.

Both filters touch only the given region, use exact integer arithmetic,
and round means half up, so results are platform-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import ImageBuffer, Rect

__all__ = ["MaskConfig", "pixelize", "box_blur"]


@dataclass(frozen=True)
class MaskConfig:
    """Concealment parameters: pixelization block edge, blur radius, passes."""

    block: int = 8
    blur_radius: int = 2
    blur_passes: int = 1

    def __post_init__(self):
        if self.block < 1:
            raise ValueError(f"block must be >= 1, got {self.block}")
        if self.blur_radius < 0:
            raise ValueError(f"blur_radius must be >= 0, got {self.blur_radius}")
        if self.blur_passes < 0:
            raise ValueError(f"blur_passes must be >= 0, got {self.blur_passes}")


def _round_half_up_div(numerator: np.ndarray, denominator) -> np.ndarray:
    # exact round-half-up of numerator/denominator for non-negative ints
    return (2 * numerator + denominator) // (2 * denominator)


def pixelize(img: ImageBuffer, r: Rect, block: int) -> ImageBuffer:
    """Replace each block x block cell of r (anchored at r's origin,
    clipped at the right/bottom edges) with its per-channel mean."""
    if block < 1:
        raise ValueError(f"block must be >= 1, got {block}")
    r.validate_within(img.width, img.height)
    if block == 1:
        return img

    region = img.pixels[r.rows, r.cols].astype(np.int64)
    row_starts = np.arange(0, r.h, block)
    col_starts = np.arange(0, r.w, block)
    cell_h = np.minimum(row_starts + block, r.h) - row_starts
    cell_w = np.minimum(col_starts + block, r.w) - col_starts

    sums = np.add.reduceat(np.add.reduceat(region, row_starts, axis=0), col_starts, axis=1)
    counts = (cell_h[:, None] * cell_w[None, :])[..., None]
    means = _round_half_up_div(sums, counts)

    filled = np.repeat(np.repeat(means, cell_h, axis=0), cell_w, axis=1)
    out = img.pixels.copy()
    out[r.rows, r.cols] = filled.astype(np.uint8)
    return ImageBuffer(out)


def box_blur(img: ImageBuffer, r: Rect, radius: int, passes: int) -> ImageBuffer:
    """Mean-filter r with a (2*radius+1)^2 window, `passes` times.

    Window samples outside r clamp to r's border, so no pixels from the
    un-concealed surroundings bleed into the region. Rounds half up
    after every pass.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if passes < 0:
        raise ValueError(f"passes must be >= 0, got {passes}")
    r.validate_within(img.width, img.height)
    if radius == 0 or passes == 0:
        return img

    window = 2 * radius + 1
    count = window * window
    region = img.pixels[r.rows, r.cols]
    for _ in range(passes):
        padded = np.pad(region, ((radius, radius), (radius, radius), (0, 0)), mode="edge")
        prefix = padded.astype(np.int64).cumsum(axis=0).cumsum(axis=1)
        prefix = np.pad(prefix, ((1, 0), (1, 0), (0, 0)))
        sums = (
            prefix[window:, window:]
            - prefix[:-window, window:]
            - prefix[window:, :-window]
            + prefix[:-window, :-window]
        )
        region = _round_half_up_div(sums, count).astype(np.uint8)

    out = img.pixels.copy()
    out[r.rows, r.cols] = region
    return ImageBuffer(out)
