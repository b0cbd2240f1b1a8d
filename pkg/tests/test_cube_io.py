"""Container format, cube round-trips, manifests, and the synthetic generator."""

import datetime as dt
import struct

import numpy as np
import pytest

from pimc import container
from pimc.cube import (
    DatasetManifest,
    ManifestEntry,
    SitsCube,
    interpolate_missing,
    load_manifest,
    read_cube,
    read_labels,
    save_manifest,
    write_cube,
    write_labels,
)
from pimc.errors import CorruptionError, FormatError
from pimc.recurrence import stack_channels
from pimc.synth import synth_cube


def small_cube(seed=0, t=8, h=6, w=5):
    rng = np.random.default_rng(seed)
    return SitsCube(
        region_id="unit",
        timestamps=[dt.date(2020, 1, 1) + dt.timedelta(days=5 * i) for i in range(t)],
        bands=["red", "nir", "blue"],
        data=rng.random((t, 3, h, w)).astype(np.float32),
    )


class TestContainer:
    def test_roundtrip_bit_exact(self, tmp_path):
        cube = small_cube(1)
        path = tmp_path / "unit.pimc"
        write_cube(cube, path)
        loaded = read_cube(path)
        assert loaded.data.tobytes() == cube.data.tobytes()
        assert loaded.bands == cube.bands
        assert loaded.timestamps == cube.timestamps
        assert loaded.region_id == "unit"

    def test_truncated_payload(self, tmp_path):
        cube = small_cube(2)
        path = tmp_path / "trunc.pimc"
        write_cube(cube, path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-10])
        with pytest.raises(CorruptionError):
            read_cube(path)

    def test_trailing_bytes(self, tmp_path):
        cube = small_cube(3)
        path = tmp_path / "extra.pimc"
        write_cube(cube, path)
        with open(path, "ab") as fh:
            fh.write(b"xx")
        with pytest.raises(CorruptionError):
            read_cube(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pimc"
        path.write_bytes(b"NOPE" + b"\x00" * 60)
        with pytest.raises(FormatError):
            read_cube(path)

    def test_zero_t_rejected(self, tmp_path):
        # hand-build a header declaring t=0
        head = struct.pack("<4sHBBf4I", b"PIMC", 1, 0, 0, 1.0, 0, 1, 2, 2)
        path = tmp_path / "zt.pimc"
        path.write_bytes(head)
        with pytest.raises(FormatError):
            read_cube(path)

    def test_u16_scaling_and_sentinel(self, tmp_path):
        raw = np.array([[[[1000, 5000], [10000, 0xFFFF]]]], dtype=np.uint16)
        path = tmp_path / "u16.pimc"
        container.write_tensor(path, raw, ["b0"], [0], dtype_code=container.DTYPE_U16, scale=10000.0)
        data, _, _ = container.read_tensor(path)
        assert np.allclose(data[0, 0, 0], [0.1, 0.5])
        assert data[0, 0, 1, 0] == 1.0
        assert np.isnan(data[0, 0, 1, 1])

    def test_reflectance_range_enforced(self, tmp_path):
        cube = small_cube(4)
        cube.data[0, 0, 0, 0] = 3.0
        path = tmp_path / "range.pimc"
        write_cube(cube, path)
        with pytest.raises(FormatError):
            read_cube(path)


class TestInterpolation:
    def test_interior_gap_linear(self):
        data = np.zeros((4, 1, 1, 1), dtype=np.float32)
        data[:, 0, 0, 0] = [0.0, np.nan, np.nan, 0.9]
        out = interpolate_missing(data)[:, 0, 0, 0]
        assert np.allclose(out, [0.0, 0.3, 0.6, 0.9], atol=1e-6)

    def test_edges_take_nearest(self):
        data = np.zeros((4, 1, 1, 1), dtype=np.float32)
        data[:, 0, 0, 0] = [np.nan, 0.4, 0.6, np.nan]
        out = interpolate_missing(data)[:, 0, 0, 0]
        assert np.allclose(out, [0.4, 0.4, 0.6, 0.6], atol=1e-6)

    def test_roundtrip_with_sentinels(self, tmp_path):
        cube = small_cube(5)
        cube.data[2, 1, 3, 2] = np.nan
        path = tmp_path / "gap.pimc"
        write_cube(cube, path)
        loaded = read_cube(path)
        assert np.all(np.isfinite(loaded.data))
        expected = 0.5 * (cube.data[1, 1, 3, 2] + cube.data[3, 1, 3, 2])
        assert abs(loaded.data[2, 1, 3, 2] - expected) < 1e-6


class TestLabels:
    def test_roundtrip(self, tmp_path):
        labels = np.arange(12).reshape(3, 4) % 5
        path = tmp_path / "labels.pimc"
        write_labels(labels, path)
        assert np.array_equal(read_labels(path), labels)


class TestManifest:
    def test_roundtrip_and_validation(self, tmp_path):
        cube = small_cube(6)
        write_cube(cube, tmp_path / "r0.pimc")
        write_labels(np.zeros((6, 5), dtype=np.int64), tmp_path / "r0_labels.pimc")
        manifest = DatasetManifest(
            entries=[ManifestEntry(cube="r0.pimc", region_id="r0", split="train", labels="r0_labels.pimc")]
        )
        save_manifest(manifest, tmp_path / "manifest.json")
        loaded = load_manifest(tmp_path / "manifest.json")
        assert loaded.entries[0].region_id == "r0"

    def test_missing_file_rejected(self, tmp_path):
        manifest = DatasetManifest(
            entries=[ManifestEntry(cube="gone.pimc", region_id="r0", split="train")]
        )
        save_manifest(manifest, tmp_path / "manifest.json")
        with pytest.raises(FormatError):
            load_manifest(tmp_path / "manifest.json")

    def test_duplicate_region_rejected(self, tmp_path):
        cube = small_cube(7)
        write_cube(cube, tmp_path / "r0.pimc")
        manifest = DatasetManifest(
            entries=[
                ManifestEntry(cube="r0.pimc", region_id="r0", split="train"),
                ManifestEntry(cube="r0.pimc", region_id="r0", split="test"),
            ]
        )
        save_manifest(manifest, tmp_path / "manifest.json")
        with pytest.raises(FormatError):
            load_manifest(tmp_path / "manifest.json")


class TestSynthCube:
    def test_deterministic(self):
        a, la = synth_cube(seed=9, classes=3, t=12, h=24, w=24)
        b, lb = synth_cube(seed=9, classes=3, t=12, h=24, w=24)
        assert np.array_equal(a.data, b.data)
        assert np.array_equal(la, lb)
        c, _ = synth_cube(seed=10, classes=3, t=12, h=24, w=24)
        assert not np.array_equal(a.data, c.data)

    def test_values_in_unit_interval(self):
        cube, _ = synth_cube(seed=11, classes=4, t=16, h=32, w=32)
        assert cube.data.min() >= 0.0 and cube.data.max() <= 1.0

    def test_bad_arguments(self):
        from pimc.errors import DomainError

        with pytest.raises(DomainError):
            synth_cube(seed=0, classes=1, t=16, h=8, w=8)
        with pytest.raises(DomainError):
            synth_cube(seed=0, classes=2, t=4, h=8, w=8)

    def test_class_pure_series_are_exact_sinusoids(self):
        # class-pure configuration: no noise, no fields, no texture
        cube, labels = synth_cube(
            seed=12, classes=2, t=32, h=16, w=16,
            noise=0.0, phase_jitter=0.0, freq_jitter=0.0, texture=0.0,
        )
        nir = cube.band("nir")
        for c in range(2):
            rows, cols = np.where(labels == c)
            series = nir[:, rows, cols]  # (t, n_c)
            # all pixels of the class share one trajectory
            assert np.all(series == series[:, :1])
            # and that trajectory is a sinusoid: fit mean + amp * sin(w t + p)
            y = series[:, 0].astype(np.float64)
            t = np.arange(32)
            freq = 2 * np.pi * (1.75**c) / 32
            basis = np.stack([np.ones_like(t), np.sin(freq * t), np.cos(freq * t)], axis=1)
            coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
            assert np.max(np.abs(basis @ coef - y)) < 1e-5

    def test_class_pure_rp_images_identical_within_class(self):
        cube, labels = synth_cube(
            seed=13, classes=3, t=16, h=16, w=16,
            noise=0.0, phase_jitter=0.0, freq_jitter=0.0, texture=0.0,
        )
        from pimc.patches import build_series

        coords = [(r, c) for r in range(16) for c in range(16)]
        sset = build_series(cube, coords)
        flat_labels = labels.reshape(-1)
        for c in range(3):
            members = np.where(flat_labels == c)[0]
            ref = stack_channels(sset.series[members[0]]).data
            for i in members[1:5]:
                assert np.array_equal(stack_channels(sset.series[i]).data, ref)

    def test_centroid_oracle_separates_classes(self):
        # independent oracle run before trusting the generator: a nearest
        # centroid classifier on raw band series must exceed 95% accuracy
        cube, labels = synth_cube(
            seed=14, classes=2, t=32, h=48, w=48, noise=0.02,
            phase_jitter=0.0, freq_jitter=0.0,
        )
        t, c, h, w = cube.data.shape
        feats = cube.data.transpose(2, 3, 0, 1).reshape(h * w, t * c)
        y = labels.reshape(-1)
        rng = np.random.default_rng(0)
        idx = rng.permutation(h * w)
        train, test = idx[:1000], idx[1000:2000]
        centroids = np.stack([feats[train][y[train] == k].mean(axis=0) for k in range(2)])
        d = ((feats[test][:, None, :] - centroids[None]) ** 2).sum(axis=2)
        acc = float(np.mean(d.argmin(axis=1) == y[test]))
        assert acc > 0.95
