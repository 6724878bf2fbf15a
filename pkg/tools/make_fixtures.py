#!/usr/bin/env python3
"""Regenerate the committed binary test fixtures.

Writes, deterministically (seeded RNG, pure numpy):

  tests/fixtures/carrier.bmp       640x480 natural-statistics image
  tests/fixtures/secret.bmp        640x480 natural-statistics image
  tests/fixtures/golden_avatar.bmp default avatar over a flat background

and prints the golden avatar coverage count frozen in the test suite.
Running it again must reproduce the committed bytes bit for bit.
"""

from pathlib import Path

import numpy as np

from reveil.avatar import RenderConfig, render_avatar
from reveil.imaging import ImageBuffer, encode_bmp
from reveil.skeleton import DEFAULT_INTRINSICS, synth_pose

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

GOLDEN_BACKGROUND = (180, 180, 180)


def _value_noise(rng, h, w, scales, amps):
    """Sum of bilinearly upsampled uniform noise octaves."""
    out = np.zeros((h, w))
    for s, a in zip(scales, amps):
        grid = rng.uniform(-1, 1, size=(h // s + 2, w // s + 2))
        ys, xs = np.arange(h) / s, np.arange(w) / s
        y0, x0 = ys.astype(int), xs.astype(int)
        fy, fx = (ys - y0)[:, None], (xs - x0)[None, :]
        g00 = grid[y0][:, x0]
        g01 = grid[y0][:, x0 + 1]
        g10 = grid[y0 + 1][:, x0]
        g11 = grid[y0 + 1][:, x0 + 1]
        out += a * ((1 - fy) * (1 - fx) * g00 + (1 - fy) * fx * g01
                    + fy * (1 - fx) * g10 + fy * fx * g11)
    return out


def natural_image(seed, base, tint):
    """640x480 image with natural statistics: multi-scale structure,
    gentle gradients, correlated channels, mild sensor-like noise."""
    rng = np.random.default_rng(seed)
    h, w = 480, 640
    yy, xx = np.mgrid[0:h, 0:w] / 100.0
    lum = base + 40 * _value_noise(rng, h, w, (160, 64, 24, 8), (1.0, 0.6, 0.35, 0.18))
    lum += 12 * np.sin(0.8 * xx) + 10 * np.cos(0.6 * yy)
    img = np.zeros((h, w, 3))
    for c in range(3):
        img[:, :, c] = lum * tint[c] + 18 * _value_noise(rng, h, w, (40, 12), (0.8, 0.4))
    img += rng.normal(0, 3.5, size=img.shape)
    return ImageBuffer(np.clip(img, 0, 255).astype(np.uint8))


def golden_avatar():
    frame = ImageBuffer.filled(640, 480, GOLDEN_BACKGROUND)
    return render_avatar(frame, synth_pose(0), DEFAULT_INTRINSICS, RenderConfig())


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    carrier = natural_image(2024, 135, (0.95, 1.0, 1.08))
    secret = natural_image(777, 120, (1.1, 0.95, 0.85))
    golden = golden_avatar()
    (FIXTURES / "carrier.bmp").write_bytes(encode_bmp(carrier))
    (FIXTURES / "secret.bmp").write_bytes(encode_bmp(secret))
    (FIXTURES / "golden_avatar.bmp").write_bytes(encode_bmp(golden))

    background = ImageBuffer.filled(640, 480, GOLDEN_BACKGROUND)
    covered = int(np.any(golden.pixels != background.pixels, axis=2).sum())
    print(f"wrote fixtures to {FIXTURES}")
    print(f"golden avatar covered pixels: {covered}")


if __name__ == "__main__":
    main()
