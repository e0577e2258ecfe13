"""Unit tests for the PGM codec, noise injection, and synthetic patterns."""

import numpy as np
import pytest

from oscseg import (GrayImage, InvalidSize, MalformedHeader, NoiseSpec,
                    TruncatedData, UnsupportedMaxval, add_gaussian_noise,
                    generate_quadrant_image, generate_two_region_image,
                    quadrant_reference, read_pgm, write_pgm)


class TestPgmCodec:
    def test_p5_normalization(self):
        data = b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64])
        img = read_pgm(data)
        expected = np.array([[0, 255], [128, 64]]) / 255.0
        assert np.array_equal(img.pixels, expected)

    def test_p2_parsing_with_comments(self):
        data = b"P2\n# a comment\n3 1\n# another\n100\n0 50 100\n"
        img = read_pgm(data)
        assert np.allclose(img.pixels, [[0.0, 0.5, 1.0]])

    def test_canonical_roundtrip_is_byte_identical(self):
        rng = np.random.default_rng(0)
        img = GrayImage(rng.random((7, 5)))
        blob = write_pgm(img)
        assert write_pgm(read_pgm(blob)) == blob

    def test_read_write_read_identity(self):
        data = b"P5\n4 3\n255\n" + bytes(range(12))
        img = read_pgm(data)
        again = read_pgm(write_pgm(img))
        assert np.array_equal(img.pixels, again.pixels)

    def test_quantization_error_bound(self):
        rng = np.random.default_rng(1)
        img = GrayImage(rng.random((16, 16)))
        recovered = read_pgm(write_pgm(img))
        assert np.abs(recovered.pixels - img.pixels).max() <= 0.5 / 255 + 1e-12

    def test_low_maxval_scaling(self):
        data = b"P5\n2 1\n4\n" + bytes([0, 4])
        img = read_pgm(data)
        assert np.array_equal(img.pixels, [[0.0, 1.0]])

    def test_unsupported_magic(self):
        with pytest.raises(MalformedHeader):
            read_pgm(b"P7\n2 2\n255\n" + bytes(4))

    def test_garbage_header(self):
        with pytest.raises(MalformedHeader):
            read_pgm(b"P5\n2 x\n255\n" + bytes(4))

    def test_maxval_out_of_range(self):
        with pytest.raises(UnsupportedMaxval):
            read_pgm(b"P5\n1 1\n65535\n\x00\x00")
        with pytest.raises(UnsupportedMaxval):
            read_pgm(b"P5\n1 1\n0\n\x00")

    def test_truncated_raster(self):
        with pytest.raises(TruncatedData):
            read_pgm(b"P5\n4 4\n255\n" + bytes(7))
        with pytest.raises(TruncatedData):
            read_pgm(b"P2\n2 2\n255\n1 2 3\n")

    def test_pixels_validation(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([[0.5, 1.5]]))
        with pytest.raises(ValueError):
            GrayImage(np.array([0.5, 0.5]))


class TestGaussianNoise:
    def test_zero_variance_is_identity(self):
        img = GrayImage(np.full((8, 8), 0.3))
        noisy = add_gaussian_noise(img, NoiseSpec(0.0, seed=5))
        assert np.array_equal(noisy.pixels, img.pixels)

    def test_seed_reproducibility_bitwise(self):
        img = GrayImage(np.full((32, 32), 0.5))
        a = add_gaussian_noise(img, NoiseSpec(0.01, seed=9))
        b = add_gaussian_noise(img, NoiseSpec(0.01, seed=9))
        assert np.array_equal(a.pixels, b.pixels)

    def test_moments_at_one_million_samples(self):
        # mid-gray with small variance: clamping never engages, so the
        # observed perturbation is the raw Gaussian draw
        img = GrayImage(np.full((1000, 1000), 0.5))
        spec = NoiseSpec(0.0025, seed=3)
        delta = add_gaussian_noise(img, spec).pixels - img.pixels
        n = delta.size
        sigma = np.sqrt(spec.variance)
        assert abs(delta.mean()) < 3 * sigma / np.sqrt(n)
        assert abs(delta.var() / spec.variance - 1.0) < 0.01

    def test_seeds_give_independent_fields(self):
        img = GrayImage(np.full((1000, 1000), 0.5))
        a = add_gaussian_noise(img, NoiseSpec(0.0025, seed=1)).pixels - 0.5
        b = add_gaussian_noise(img, NoiseSpec(0.0025, seed=2)).pixels - 0.5
        r = np.corrcoef(a.ravel(), b.ravel())[0, 1]
        assert abs(r) < 0.01

    def test_output_stays_in_range(self):
        img = GrayImage(np.full((64, 64), 0.95))
        noisy = add_gaussian_noise(img, NoiseSpec(0.25, seed=0))
        assert noisy.pixels.min() >= 0.0 and noisy.pixels.max() <= 1.0


class TestQuadrantImage:
    def test_quadrant_means_near_band_midpoints(self):
        img = generate_quadrant_image(16, seed=0)
        half = 8
        means = [img.pixels[r:r + half, c:c + half].mean()
                 for r, c in [(0, 0), (0, half), (half, 0), (half, half)]]
        assert np.allclose(means, [0.125, 0.375, 0.625, 0.875], atol=1e-9)

    def test_whole_image_histogram_is_flat_over_bands(self):
        img = generate_quadrant_image(16, seed=1)
        counts, _ = np.histogram(img.pixels, bins=4, range=(0.0, 1.0))
        assert (counts == 64).all()

    def test_quadrant_supports_stay_in_bands(self):
        img = generate_quadrant_image(8, seed=2)
        half = 4
        for k, (r, c) in enumerate([(0, 0), (0, half), (half, 0),
                                    (half, half)]):
            quad = img.pixels[r:r + half, c:c + half]
            assert quad.min() >= k / 4 and quad.max() < (k + 1) / 4

    def test_levels_are_equally_counted(self):
        img = generate_quadrant_image(16, levels_per_quadrant=8, seed=0)
        quad = img.pixels[:8, :8]
        _, counts = np.unique(quad, return_counts=True)
        assert (counts == 8).all() and len(counts) == 8

    def test_seed_determinism(self):
        a = generate_quadrant_image(16, seed=7)
        b = generate_quadrant_image(16, seed=7)
        assert np.array_equal(a.pixels, b.pixels)

    def test_invalid_sizes(self):
        with pytest.raises(InvalidSize):
            generate_quadrant_image(15)
        with pytest.raises(InvalidSize):
            generate_quadrant_image(16, levels_per_quadrant=7)
        with pytest.raises(InvalidSize):
            generate_quadrant_image(0)

    def test_reference_layout(self):
        ref = quadrant_reference(4)
        assert ref.tolist() == [[0, 0, 1, 1], [0, 0, 1, 1],
                                [2, 2, 3, 3], [2, 2, 3, 3]]


class TestTwoRegionImage:
    def test_mean_intensity(self):
        img, _ = generate_two_region_image(16, 0.2, 0.8)
        assert img.pixels.mean() == pytest.approx(0.5)

    def test_reference_matches_layout(self):
        img, ref = generate_two_region_image(8, 0.3, 0.7)
        assert (img.pixels[:, :4] == 0.3).all()
        assert (img.pixels[:, 4:] == 0.7).all()
        assert (ref[:, :4] == 0).all() and (ref[:, 4:] == 1).all()

    def test_equal_intensities_still_two_region_reference(self):
        img, ref = generate_two_region_image(6, 0.5, 0.5)
        assert (img.pixels == 0.5).all()
        assert set(np.unique(ref)) == {0, 1}

    def test_validation(self):
        with pytest.raises(ValueError):
            generate_two_region_image(8, -0.1, 0.5)
        with pytest.raises(InvalidSize):
            generate_two_region_image(1, 0.2, 0.8)
