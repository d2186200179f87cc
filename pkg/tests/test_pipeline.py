import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csstd.convexity import verify_convex
from csstd.pipeline import (
    FeatureHeaderError,
    FeaturePayloadError,
    FeatureValueError,
    PgmError,
    dice,
    generate_phantom,
    geometry_scene,
    read_feature_file,
    read_image_pgm,
    read_mask_pgm,
    region_variance_feature,
    smooth_dice_loss,
    write_feature_file,
    write_mask_pgm,
    write_overlay,
)
from csstd.sublevel import label_to_sublevel


class TestRegionVarianceFeature:
    def test_at_first_mean(self):
        v = np.full((4, 4), 0.3)
        o = region_variance_feature(v, 0.3, 0.9)
        np.testing.assert_allclose(o, 0.36)
        assert (o > 0).all()

    def test_midpoint_is_zero(self):
        v = np.full((4, 4), 0.5)
        np.testing.assert_allclose(region_variance_feature(v, 0.2, 0.8), 0.0, atol=1e-15)

    def test_direct_value(self):
        o = region_variance_feature(np.array([[0.2]]), 0.0, 1.0)
        assert o[0, 0] == pytest.approx(0.6, abs=1e-12)


class TestDice:
    def test_identical(self):
        m = np.zeros((10, 10), dtype=int)
        m[2:7, 2:7] = 1
        assert dice(m, m) == 100.0

    def test_disjoint(self):
        a = np.zeros((10, 10), dtype=int)
        b = np.zeros((10, 10), dtype=int)
        a[:2], b[5:] = 1, 1
        assert dice(a, b) == 0.0

    def test_partial_overlap_sixty_percent(self):
        # areas 100/100 with overlap 60: 2*60/(120+40+40) = 60%
        a = np.zeros((20, 20), dtype=int)
        b = np.zeros((20, 20), dtype=int)
        a[0:10, 0:10] = 1
        b[0:10, 4:14] = 1
        assert dice(a, b) == pytest.approx(60.0, abs=1e-12)

    def test_both_empty(self):
        assert dice(np.zeros((4, 4), dtype=int), np.zeros((4, 4), dtype=int)) == 100.0

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        a = (rng.random((12, 12)) > 0.5).astype(int)
        b = (rng.random((12, 12)) > 0.5).astype(int)
        assert dice(a, b) == dice(b, a)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            dice(np.zeros((2, 2), dtype=int), np.zeros((3, 2), dtype=int))


class TestSmoothDiceLoss:
    def test_perfect_match(self):
        m = np.zeros((8, 8))
        m[2:5, 2:5] = 1.0
        assert smooth_dice_loss(m, m) == 0.0

    def test_half_confidence(self):
        u = np.ones((10, 10))
        v = np.full((10, 10), 0.5)
        assert smooth_dice_loss(v, u) == pytest.approx(0.2, abs=1e-12)

    def test_disjoint(self):
        v = np.zeros((8, 8))
        u = np.zeros((8, 8))
        v[0, 0] = 1.0
        u[5, 5] = 1.0
        assert smooth_dice_loss(v, u) == 1.0

    def test_both_zero_rejected(self):
        with pytest.raises(ValueError):
            smooth_dice_loss(np.zeros((4, 4)), np.zeros((4, 4)))

    def test_zero_iff_exact_binary_match(self):
        rng = np.random.default_rng(1)
        u = (rng.random((8, 8)) > 0.5).astype(float)
        v = u.copy()
        v[0, 0] = abs(v[0, 0] - 0.25)
        assert smooth_dice_loss(v, u) > 0.0


class TestPhantoms:
    def test_nested_disks_structure(self):
        _, labels = generate_phantom("nested_disks", 128, 0)
        stack = label_to_sublevel(labels, 3)
        assert (stack[0] <= stack[1]).all()
        for g in range(2):
            assert verify_convex(stack[g].astype(int), 4000, 0).verdict

    def test_star_is_concave(self):
        _, labels = generate_phantom("star", 192, 0)
        rep = verify_convex((labels == 1).astype(int), 10000, 0)
        assert not rep.verdict
        assert rep.components[0].violating_fraction > 0.05

    def test_disks_are_convex(self):
        _, labels = generate_phantom("disks", 128, 0)
        assert verify_convex((labels == 1).astype(int), 5000, 0).verdict

    def test_seeded_bitwise_reproducible(self):
        img1, lab1 = generate_phantom("disks", 96, 7)
        img2, lab2 = generate_phantom("disks", 96, 7)
        np.testing.assert_array_equal(img1, img2)
        np.testing.assert_array_equal(lab1, lab2)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate_phantom("blob", 128, 0)

    def test_size_floor(self):
        with pytest.raises(ValueError):
            generate_phantom("disks", 32, 0)

    def test_scene_has_concave_and_convex_parts(self):
        _, labels = geometry_scene(256, 0)
        rep = verify_convex((labels == 1).astype(int), 5000, 0)
        assert rep.component_count >= 3
        assert not rep.verdict
        assert any(c.violating_fraction < 0.01 for c in rep.components)
        assert any(c.violating_fraction > 0.05 for c in rep.components)


class TestFeatureFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        stack = rng.normal(size=(3, 7, 5)).astype(np.float32).astype(float)
        path = tmp_path / "f.ff1"
        write_feature_file(path, stack)
        back = read_feature_file(path)
        assert len(back) == 3
        for g in range(3):
            np.testing.assert_array_equal(back[g], stack[g])

    def test_header_layout(self, tmp_path):
        path = tmp_path / "f.ff1"
        write_feature_file(path, np.zeros((2, 3, 4)))
        blob = path.read_bytes()
        assert blob.startswith(b"FF1 4 3 2\n")
        assert len(blob) == 10 + 4 * 4 * 3 * 2

    def test_minimal_valid_file(self, tmp_path):
        path = tmp_path / "ok.ff1"
        path.write_bytes(b"FF1 2 2 1\n" + b"\x00" * 16)
        fields = read_feature_file(path)
        assert fields[0].shape == (2, 2)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short.ff1"
        path.write_bytes(b"FF1 2 2 1\n" + b"\x00" * 12)
        with pytest.raises(FeaturePayloadError):
            read_feature_file(path)

    def test_excess_payload(self, tmp_path):
        path = tmp_path / "long.ff1"
        path.write_bytes(b"FF1 2 2 1\n" + b"\x00" * 20)
        with pytest.raises(FeaturePayloadError):
            read_feature_file(path)

    @pytest.mark.parametrize(
        "header",
        [b"FF2 2 2 1\n", b"FF1 2 2\n", b"FF1 a 2 1\n", b"FF1 0 2 1\n", b"FF1 2 -1 1\n"],
    )
    def test_malformed_headers(self, tmp_path, header):
        path = tmp_path / "bad.ff1"
        path.write_bytes(header + b"\x00" * 16)
        with pytest.raises(FeatureHeaderError):
            read_feature_file(path)

    def test_missing_newline(self, tmp_path):
        path = tmp_path / "bad.ff1"
        path.write_bytes(b"FF1 2 2 1")
        with pytest.raises(FeatureHeaderError):
            read_feature_file(path)

    def test_non_finite_payload(self, tmp_path):
        path = tmp_path / "nan.ff1"
        payload = np.array([[np.nan, 0, 0, 0]], dtype="<f4").tobytes()
        path.write_bytes(b"FF1 2 2 1\n" + payload)
        with pytest.raises(FeatureValueError):
            read_feature_file(path)

    def test_error_types_are_distinct(self):
        assert not issubclass(FeatureHeaderError, FeaturePayloadError)
        assert not issubclass(FeaturePayloadError, FeatureHeaderError)

    @settings(max_examples=25, deadline=None)
    @given(
        w=st.integers(1, 6), h=st.integers(1, 6), c=st.integers(1, 3),
        seed=st.integers(0, 2**31 - 1),
    )
    def test_round_trip_property(self, tmp_path_factory, w, h, c, seed):
        rng = np.random.default_rng(seed)
        stack = rng.normal(size=(c, h, w)).astype(np.float32).astype(float)
        path = tmp_path_factory.mktemp("ff1") / "t.ff1"
        write_feature_file(path, stack)
        back = np.stack(read_feature_file(path))
        np.testing.assert_array_equal(back, stack)


class TestPgm:
    def test_mask_round_trip(self, tmp_path):
        labels = np.arange(12).reshape(3, 4) % 4 + 1
        path = tmp_path / "m.pgm"
        write_mask_pgm(path, labels)
        np.testing.assert_array_equal(read_mask_pgm(path), labels)

    def test_image_scaled(self, tmp_path):
        path = tmp_path / "i.pgm"
        write_mask_pgm(path, np.array([[0, 255], [128, 64]]))
        img = read_image_pgm(path)
        np.testing.assert_allclose(img, [[0.0, 1.0], [128 / 255, 64 / 255]])

    def test_comment_header(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# comment line\n2 2\n255\n\x01\x02\x03\x04")
        np.testing.assert_array_equal(read_mask_pgm(path), [[1, 2], [3, 4]])

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "p2.pgm"
        path.write_bytes(b"P2\n2 2\n255\n1 2 3 4\n")
        with pytest.raises(PgmError):
            read_mask_pgm(path)

    def test_wrong_maxval(self, tmp_path):
        path = tmp_path / "m16.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + b"\x00" * 8)
        with pytest.raises(PgmError):
            read_mask_pgm(path)

    def test_truncated_pixels(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + b"\x00" * 7)
        with pytest.raises(PgmError):
            read_mask_pgm(path)


class TestOverlay:
    def test_no_boundaries_for_empty_stack(self, tmp_path):
        image = np.full((6, 6), 0.5)
        path = tmp_path / "o.ppm"
        write_overlay(path, image, np.zeros((2, 6, 6)))
        blob = path.read_bytes()
        assert blob.startswith(b"P6\n6 6\n255\n")
        rgb = np.frombuffer(blob.split(b"\n", 3)[3], dtype=np.uint8).reshape(6, 6, 3)
        assert (rgb[..., 0] == rgb[..., 1]).all() and (rgb[..., 1] == rgb[..., 2]).all()

    def test_nested_channels_draw_two_colors(self, tmp_path):
        _, labels = generate_phantom("nested_disks", 96, 0)
        stack = label_to_sublevel(labels, 3)
        path = tmp_path / "o.ppm"
        write_overlay(path, np.full((96, 96), 0.5), stack)
        rgb = np.frombuffer(path.read_bytes().split(b"\n", 3)[3], dtype=np.uint8)
        rgb = rgb.reshape(96, 96, 3)
        greens = ((rgb == (0, 220, 0)).all(axis=2)).sum()
        blues = ((rgb == (40, 80, 255)).all(axis=2)).sum()
        assert greens > 20 and blues > 20
