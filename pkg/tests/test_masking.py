import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reveil.imaging import ImageBuffer, Rect, RectOutOfBounds
from reveil.masking import MaskConfig, box_blur, pixelize


def random_image(w, h, seed):
    rng = np.random.default_rng(seed)
    return ImageBuffer(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


class TestPixelize:
    def test_uniform_region_unchanged(self):
        img = ImageBuffer.filled(16, 16, (40, 80, 120))
        assert pixelize(img, Rect(2, 2, 12, 12), 4) == img

    def test_block_one_is_identity(self):
        img = random_image(10, 10, 1)
        assert pixelize(img, Rect(0, 0, 10, 10), 1) == img

    def test_2x2_mean(self):
        px = np.zeros((4, 4, 3), dtype=np.uint8)
        px[1:3, 1:3, 0] = [[0, 2], [4, 6]]
        out = pixelize(ImageBuffer(px), Rect(1, 1, 2, 2), 2)
        assert np.all(out.pixels[1:3, 1:3, 0] == 3)

    def test_rounds_half_up(self):
        px = np.zeros((1, 2, 3), dtype=np.uint8)
        px[0, :, 1] = [0, 1]  # mean 0.5 -> 1
        out = pixelize(ImageBuffer(px), Rect(0, 0, 2, 1), 2)
        assert np.all(out.pixels[0, :, 1] == 1)

    def test_ragged_edge_cells_are_clipped(self):
        # 5 wide, block 2 -> cell widths 2, 2, 1; last column is its own cell
        px = np.zeros((2, 5, 3), dtype=np.uint8)
        px[:, 4, 2] = [10, 30]
        out = pixelize(ImageBuffer(px), Rect(0, 0, 5, 2), 2)
        assert np.all(out.pixels[:, 4, 2] == 20)
        assert np.all(out.pixels[:, :4, 2] == 0)

    def test_out_of_bounds(self):
        with pytest.raises(RectOutOfBounds):
            pixelize(ImageBuffer.filled(4, 4), Rect(2, 2, 4, 4), 2)

    def test_locality(self):
        img = random_image(20, 14, 5)
        r = Rect(3, 4, 9, 7)
        out = pixelize(img, r, 3)
        mask = np.ones((14, 20), dtype=bool)
        mask[r.rows, r.cols] = False
        assert np.array_equal(out.pixels[mask], img.pixels[mask])

    @given(seed=st.integers(0, 2**32 - 1), block=st.integers(1, 4))
    @settings(max_examples=40)
    def test_idempotent_when_block_divides(self, seed, block):
        img = random_image(block * 5 + 6, block * 3 + 2, seed)
        r = Rect(2, 1, block * 5, block * 3)
        once = pixelize(img, r, block)
        assert pixelize(once, r, block) == once

    def test_cell_sum_preserved_within_rounding_slack(self):
        img = random_image(16, 16, 11)
        r = Rect(0, 0, 16, 16)
        block = 4
        out = pixelize(img, r, block)
        for cy in range(0, 16, block):
            for cx in range(0, 16, block):
                before = img.pixels[cy : cy + block, cx : cx + block].astype(int)
                after = out.pixels[cy : cy + block, cx : cx + block].astype(int)
                for c in range(3):
                    assert abs(before[:, :, c].sum() - after[:, :, c].sum()) < block * block


class TestBoxBlur:
    def test_zero_radius_or_passes_is_identity(self):
        img = random_image(8, 8, 2)
        r = Rect(0, 0, 8, 8)
        assert box_blur(img, r, 0, 1) == img
        assert box_blur(img, r, 2, 0) == img

    def test_point_spread(self):
        px = np.zeros((5, 5, 3), dtype=np.uint8)
        px[2, 2] = (255, 255, 255)
        out = box_blur(ImageBuffer(px), Rect(0, 0, 5, 5), 1, 1)
        expected = np.zeros((5, 5, 3), dtype=np.uint8)
        expected[1:4, 1:4] = 28  # round(255 / 9)
        assert np.array_equal(out.pixels, expected)

    def test_uniform_region_unchanged(self):
        img = ImageBuffer.filled(9, 9, (77, 88, 99))
        assert box_blur(img, Rect(1, 1, 7, 7), 3, 2) == img

    def test_edge_replication_keeps_region_self_contained(self):
        # bright frame outside the region must not leak in
        px = np.full((7, 7, 3), 255, dtype=np.uint8)
        px[2:5, 2:5] = 10
        out = box_blur(ImageBuffer(px), Rect(2, 2, 3, 3), 2, 1)
        assert np.all(out.pixels[2:5, 2:5] == 10)

    def test_locality(self):
        img = random_image(20, 14, 6)
        r = Rect(5, 3, 8, 9)
        out = box_blur(img, r, 2, 2)
        mask = np.ones((14, 20), dtype=bool)
        mask[r.rows, r.cols] = False
        assert np.array_equal(out.pixels[mask], img.pixels[mask])

    @given(seed=st.integers(0, 2**32 - 1), radius=st.integers(1, 3))
    @settings(max_examples=40)
    def test_contraction_toward_mean(self, seed, radius):
        img = random_image(12, 12, seed)
        r = Rect(2, 2, 8, 8)
        out = box_blur(img, r, radius, 1)
        for c in range(3):
            before = img.pixels[r.rows, r.cols, c]
            after = out.pixels[r.rows, r.cols, c]
            assert after.min() >= before.min()
            assert after.max() <= before.max()

    def test_out_of_bounds(self):
        with pytest.raises(RectOutOfBounds):
            box_blur(ImageBuffer.filled(4, 4), Rect(0, 3, 2, 2), 1, 1)


class TestMaskConfig:
    def test_defaults(self):
        cfg = MaskConfig()
        assert (cfg.block, cfg.blur_radius, cfg.blur_passes) == (8, 2, 1)

    def test_validation(self):
        with pytest.raises(ValueError):
            MaskConfig(block=0)
        with pytest.raises(ValueError):
            MaskConfig(blur_radius=-1)
        with pytest.raises(ValueError):
            MaskConfig(blur_passes=-1)
