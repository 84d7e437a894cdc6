import numpy as np
import pytest

from periocular import descriptors as desc
from periocular import kernels
from periocular.errors import BlockTooSmallError, ShapeError
from periocular.gabor import build_gabor_bank, gabor_at_point, gabor_at_points
from periocular.imgproc import RoiSpec, mirror_horizontal

import oracles
from conftest import sinusoid_image


def random_blocks(n=100, side=16, seed=99):
    rng = np.random.default_rng(seed)
    return rng.uniform(0, 255, (n, side, side))


class TestLbp:
    def test_constant_block_one_hot_bin0(self):
        hist = desc.lbp_block(np.full((8, 8), 120.0))
        np.testing.assert_array_equal(hist, [1, 0, 0, 0, 0, 0, 0, 0])

    def test_top_left_neighbor_sets_bit7(self):
        # Sole greater neighbor at top-left: code 128, which lands in bin 4.
        block = np.full((3, 3), 50.0)
        block[0, 0] = 200.0
        assert oracles.naive_lbp_codes(block)[0, 0] == 128
        hist = desc.lbp_block(block)
        np.testing.assert_array_equal(hist, [0, 0, 0, 0, 1, 0, 0, 0])

    def test_3x3_block_is_one_hot(self, rng):
        hist = desc.lbp_block(rng.uniform(0, 255, (3, 3)))
        assert hist.sum() == pytest.approx(1.0)
        assert np.count_nonzero(hist) == 1

    def test_too_small_rejected(self):
        with pytest.raises(BlockTooSmallError):
            desc.lbp_block(np.zeros((2, 2)))

    def test_matches_naive_reference(self):
        for block in random_blocks(20):
            np.testing.assert_array_equal(kernels.lbp_codes(block),
                                          oracles.naive_lbp_codes(block))
            np.testing.assert_allclose(desc.lbp_block(block),
                                       oracles.naive_lbp_histogram(block),
                                       atol=1e-12)

    def test_backends_agree(self):
        from periocular.kernels import py_backend
        for block in random_blocks(10, seed=5):
            np.testing.assert_array_equal(kernels.lbp_codes(block),
                                          py_backend.lbp_codes(block))


class TestHog:
    def test_constant_block_zero_vector(self):
        np.testing.assert_array_equal(desc.hog_block(np.full((10, 10), 33.0)),
                                      np.zeros(8))

    def test_vertical_step_edge_bin0(self):
        block = np.zeros((16, 16))
        block[:, 8:] = 255.0
        hist = desc.hog_block(block)
        assert hist[0] == pytest.approx(1.0)
        np.testing.assert_allclose(hist[1:], 0, atol=1e-12)

    def test_mirror_preserves_total_mass(self):
        for block in random_blocks(10, seed=21):
            gx = (block[1:-1, 2:] - block[1:-1, :-2]) / 2.0
            gy = (block[2:, 1:-1] - block[:-2, 1:-1]) / 2.0
            m = mirror_horizontal(block)
            mgx = (m[1:-1, 2:] - m[1:-1, :-2]) / 2.0
            mgy = (m[2:, 1:-1] - m[:-2, 1:-1]) / 2.0
            assert np.hypot(gx, gy).sum() == pytest.approx(np.hypot(mgx, mgy).sum())

    def test_matches_naive_reference(self):
        for block in random_blocks(20, seed=13):
            np.testing.assert_allclose(desc.hog_block(block),
                                       oracles.naive_hog(block), atol=1e-9)

    def test_histogram_normalized(self):
        for block in random_blocks(10, seed=4):
            hist = desc.hog_block(block)
            assert np.all(hist >= 0)
            assert hist.sum() == pytest.approx(1.0)


class TestGaborBank:
    def test_descriptor_bank_layout(self):
        bank = build_gabor_bank(5, 6, 0.25)
        assert len(bank) == 30
        assert bank.frequencies == (0.25, 0.125, 0.0625, 0.03125, 0.015625)
        assert bank.orientations == (0.0, 30.0, 60.0, 90.0, 120.0, 150.0)

    def test_gist_bank_layout(self):
        bank = build_gabor_bank(4, 8, 0.25)
        assert len(bank) == 32
        assert np.diff(bank.orientations) == pytest.approx([22.5] * 7)

    def test_masks_are_dc_free(self):
        for bank in (build_gabor_bank(5, 6, 0.25), build_gabor_bank(4, 8, 0.25)):
            for mask in bank.filters:
                assert abs(mask.mean()) < 1e-10

    def test_aliasing_frequency_rejected(self):
        with pytest.raises(ValueError):
            build_gabor_bank(5, 6, 0.6)

    def test_constant_image_silent(self):
        bank = build_gabor_bank(5, 6, 0.25)
        img = np.full((460, 460), 99.0)
        resp = gabor_at_point(img, (230, 230), bank)
        assert resp.max() < 1e-8

    def test_sinusoid_selects_matching_channel(self):
        bank = build_gabor_bank(5, 6, 0.25)
        img = sinusoid_image(30.0, 1 / 8, shape=(460, 460))
        resp = gabor_at_point(img, (230, 230), bank)
        expected = 1 * 6 + 1  # frequency 1/8, orientation 30 deg
        assert int(np.argmax(resp)) == expected
        others = np.delete(resp, expected)
        assert resp[expected] > others.max()

    def test_corner_point_finite(self, rng):
        bank = build_gabor_bank(5, 6, 0.25)
        resp = gabor_at_point(rng.uniform(0, 255, (60, 60)), (0, 0), bank)
        assert np.all(np.isfinite(resp))

    def test_batched_points_match_single(self, rng):
        bank = build_gabor_bank(5, 6, 0.25)
        img = rng.uniform(0, 255, (96, 224))
        points = np.array([[8, 8], [112, 48], [216, 88], [0, 95]])
        batched = gabor_at_points(img, points, bank)
        for k, (x, y) in enumerate(points):
            np.testing.assert_allclose(batched[k],
                                       gabor_at_point(img, (x, y), bank),
                                       rtol=1e-9, atol=1e-9)


class TestGlcm:
    def test_constant_block_diagonal(self):
        for m in desc.glcm_block(np.full((8, 8), 200.0), levels=8):
            assert m.matrix.sum() == pytest.approx(1.0)
            k = 200 * 8 // 256
            assert m.matrix[k, k] == pytest.approx(1.0)

    def test_two_by_two_binary_pattern(self):
        block = np.array([[0.0, 255.0], [0.0, 255.0]])
        matrices = desc.glcm_block(block, levels=2)
        horizontal = matrices[0]  # offset (0, 1)
        np.testing.assert_allclose(horizontal.matrix, [[0, 0.5], [0.5, 0]])

    def test_symmetry_and_normalization(self):
        for block in random_blocks(10, seed=77):
            for m in desc.glcm_block(block, levels=8):
                np.testing.assert_allclose(m.matrix, m.matrix.T, atol=1e-15)
                assert abs(m.matrix.sum() - 1.0) < 1e-12
                assert np.all(m.matrix >= 0)

    def test_matches_naive_reference(self):
        for block in random_blocks(20, seed=31):
            matrices = desc.glcm_block(block, levels=8)
            for m, (dr, dc) in zip(matrices, desc.GLCM_OFFSETS):
                np.testing.assert_allclose(
                    m.matrix, oracles.naive_glcm(block, 8, dr, dc), atol=1e-12)

    def test_features_hand_computed_matrix(self):
        m = desc.Glcm(levels=2, matrix=np.array([[0.0, 0.5], [0.5, 0.0]]))
        feats = desc.glcm_features([m])
        np.testing.assert_allclose(feats, [1.0, 0.5, 1.0, 0.5, 2.0], atol=1e-12)

    def test_features_constant_block(self):
        matrices = desc.glcm_block(np.full((8, 8), 255.0), levels=8)
        k = 8  # 1-based level index of the single populated diagonal entry
        np.testing.assert_allclose(desc.glcm_features(matrices),
                                   [0.0, 1.0, 0.0, 1.0, k * k], atol=1e-12)

    def test_averaging_identical_matrices(self):
        m = desc.glcm_block(random_blocks(1, seed=9)[0], levels=8)[0]
        np.testing.assert_allclose(desc.glcm_features([m] * 4),
                                   desc.glcm_features([m]), atol=1e-15)

    def test_feature_ranges(self):
        for block in random_blocks(10, seed=55):
            c, h, e, en, a = desc.glcm_features(desc.glcm_block(block, levels=8))
            assert 0 <= e <= 2 * np.log2(8)
            assert 0 < en <= 1
            assert 0 < h <= 1

    def test_size_mismatch_rejected(self):
        a = desc.Glcm(levels=2, matrix=np.eye(2) / 2)
        b = desc.Glcm(levels=4, matrix=np.eye(4) / 4)
        with pytest.raises(ShapeError):
            desc.glcm_features([a, b])


class TestGist:
    def test_constant_block_zero(self):
        out = desc.gist_block(np.full((16, 16), 180.0))
        assert out.shape == (32,)
        assert np.abs(out).max() < 1e-8

    def test_sinusoid_selects_matching_channel(self):
        bank = build_gabor_bank(4, 8, 0.25)
        block = sinusoid_image(67.5, 0.25, shape=(16, 16))
        out = desc.gist_block(block, bank)
        expected = 0 * 8 + 3  # frequency 1/4, orientation 67.5 deg
        assert int(np.argmax(out)) == expected
        assert out[expected] > np.delete(out, expected).max()

    def test_output_length_always_32(self, rng):
        assert desc.gist_block(rng.uniform(0, 255, (32, 32))).size == 32

    def test_wrong_bank_layout_rejected(self, rng):
        with pytest.raises(ShapeError):
            desc.gist_block(rng.uniform(0, 255, (16, 16)),
                            build_gabor_bank(5, 6, 0.25))


class TestExtractFeatures:
    @pytest.mark.parametrize("descriptor,per_block", sorted(desc.BLOCK_FEATURE_SIZES.items()))
    @pytest.mark.parametrize("variant,block_size", [("small", 16), ("small", 32),
                                                    ("large", 16), ("large", 32)])
    def test_dims_table(self, rng, descriptor, per_block, variant, block_size):
        spec = RoiSpec(variant)
        roi = rng.uniform(0, 255, (spec.height, spec.width))
        fv = desc.extract_features(roi, descriptor, spec, block_size)
        blocks = (spec.height // block_size) * (spec.width // block_size)
        assert fv.dims == blocks * per_block
        assert np.all(np.isfinite(fv.values))

    def test_reference_dims(self, rng):
        large, small = RoiSpec("large"), RoiSpec("small")
        roi_l = rng.uniform(0, 255, (96, 224))
        roi_s = rng.uniform(0, 255, (64, 224))
        assert desc.extract_features(roi_l, "GIST", large, 16).dims == 2688
        assert desc.extract_features(roi_s, "GLCM", small, 32).dims == 70
        assert desc.extract_features(roi_l, "GABOR", large, 32).dims == 630

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ShapeError):
            desc.extract_features(rng.uniform(0, 255, (64, 224)), "LBP",
                                  RoiSpec("large"), 16)

    def test_row_major_block_order(self, rng):
        spec = RoiSpec("small")
        roi = rng.uniform(0, 255, (64, 224))
        fv = desc.extract_features(roi, "LBP", spec, 32)
        np.testing.assert_allclose(fv.values[:8], desc.lbp_block(roi[:32, :32]))
        np.testing.assert_allclose(fv.values[8:16], desc.lbp_block(roi[:32, 32:64]))

    def test_deterministic(self, rng):
        spec = RoiSpec("small")
        roi = rng.uniform(0, 255, (64, 224))
        a = desc.extract_features(roi, "GABOR", spec, 32).values
        b = desc.extract_features(roi.copy(), "GABOR", spec, 32).values
        np.testing.assert_array_equal(a, b)


class TestFuse:
    def test_dims_add_up(self, rng):
        spec = RoiSpec("large")
        roi = rng.uniform(0, 255, (96, 224))
        parts = [desc.extract_features(roi, name, spec, 16)
                 for name in ("LBP", "HOG", "GLCM")]
        fused = desc.fuse(parts)
        assert fused.descriptor == "FUSED"
        assert fused.dims == 672 + 672 + 420 == sum(p.dims for p in parts)

    def test_singleton(self, rng):
        fv = desc.extract_features(rng.uniform(0, 255, (64, 224)), "HOG",
                                   RoiSpec("small"), 32)
        fused = desc.fuse([fv])
        np.testing.assert_array_equal(fused.values, fv.values)
        assert fused.descriptor == "FUSED"

    def test_order_is_a_permutation(self, rng):
        spec = RoiSpec("small")
        roi = rng.uniform(0, 255, (64, 224))
        a = desc.extract_features(roi, "LBP", spec, 32)
        b = desc.extract_features(roi, "HOG", spec, 32)
        ab, ba = desc.fuse([a, b]), desc.fuse([b, a])
        assert not np.array_equal(ab.values, ba.values)
        np.testing.assert_array_equal(np.sort(ab.values), np.sort(ba.values))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            desc.fuse([])
