"""Dataset construction: labels, splits, leakage, caching."""

import numpy as np
import pytest

from radiofp.data import (
    SplitSpec,
    build_dataset,
    device_task,
    distance_task,
    load_dataset_cache,
    save_dataset_cache,
)
from radiofp.errors import ConfigError
from radiofp.sim import ChannelProfile, DeviceProfile, capture_dataset, load_manifest


@pytest.fixture(scope="module")
def manifest(tmp_path_factory):
    out = tmp_path_factory.mktemp("captures")
    devices = [DeviceProfile(device_id=i, cfo_hz=150.0 * (i - 1)) for i in range(3)]
    channels = [
        ChannelProfile(distance_ft=2.0, taps=(1.0,), snr_db=25.0),
        ChannelProfile(distance_ft=8.0, taps=(0.8, 0.5j), snr_db=25.0),
    ]
    # 3 devices x 2 distances x 2 runs, 40 windows of 256 per capture
    path = capture_dataset(devices, channels, out, runs=2, duration_s=40 * 256 / 5e6, master_seed=5)
    return load_manifest(path)


def source_set(ds):
    return {tuple(row) for row in ds.sources}


class TestBuildDataset:
    def test_device_task_classes(self, manifest):
        splits = build_dataset(manifest, device_task(2.0), SplitSpec(seed=1))
        assert splits["train"].n_classes == 3
        assert splits["train"].label_names == ["dev0", "dev1", "dev2"]
        # only distance-2 windows present
        assert np.all(splits["train"].sources[:, 1] == 2.0)

    def test_distance_task_classes(self, manifest):
        splits = build_dataset(manifest, distance_task(), SplitSpec(seed=1))
        assert splits["train"].n_classes == 2
        assert splits["train"].label_names == ["2ft", "8ft"]

    def test_pooled_fraction_sizes(self, manifest):
        splits = build_dataset(manifest, device_task(2.0), SplitSpec(fractions=(0.8, 0.1, 0.1), seed=0))
        n = sum(len(splits[s]) for s in ("train", "val", "test"))
        # 3 devices x 2 runs x 40 windows = 240 windows; 192/24/24
        assert n == 240
        assert len(splits["train"]) == 192
        assert len(splits["val"]) == 24
        assert len(splits["test"]) == 24

    def test_no_leakage_between_splits(self, manifest):
        splits = build_dataset(manifest, distance_task(), SplitSpec(seed=3))
        s_tr, s_va, s_te = (source_set(splits[k]) for k in ("train", "val", "test"))
        assert not (s_tr & s_va) and not (s_tr & s_te) and not (s_va & s_te)

    def test_train_class_balance(self, manifest):
        splits = build_dataset(manifest, device_task(8.0), SplitSpec(seed=2))
        counts = np.bincount(splits["train"].labels, minlength=3)
        assert counts.max() - counts.min() <= 1

    def test_labels_match_source_metadata(self, manifest):
        splits = build_dataset(manifest, device_task(2.0), SplitSpec(seed=4))
        for name in ("train", "val", "test"):
            ds = splits[name]
            for label, src in zip(ds.labels, ds.sources):
                assert ds.label_names[label] == f"dev{int(src[0])}"

    def test_run_holdout_exclusivity(self, manifest):
        spec = SplitSpec(mode="run_holdout", fractions=(0.8, 0.1, 0.1), seed=0)
        splits = build_dataset(manifest, distance_task(), spec)
        assert np.all(splits["train"].sources[:, 2] == 0)
        assert np.all(splits["val"].sources[:, 2] == 1)
        assert np.all(splits["test"].sources[:, 2] == 1)

    def test_windows_are_unit_rms(self, manifest):
        splits = build_dataset(manifest, distance_task(), SplitSpec(seed=0))
        t = splits["train"].windows.astype(np.float64)
        power = (t**2).sum(axis=1).mean(axis=1)  # mean |z|^2 per window
        np.testing.assert_allclose(power, 1.0, atol=1e-5)

    def test_missing_distance_rejected(self, manifest):
        with pytest.raises(ConfigError):
            build_dataset(manifest, device_task(99.0), SplitSpec())

    def test_seeded_shuffle_reproducible(self, manifest):
        a = build_dataset(manifest, distance_task(), SplitSpec(seed=7))
        b = build_dataset(manifest, distance_task(), SplitSpec(seed=7))
        np.testing.assert_array_equal(a["train"].labels, b["train"].labels)
        np.testing.assert_array_equal(a["train"].windows, b["train"].windows)


class TestCache:
    def test_round_trip(self, manifest, tmp_path):
        splits = build_dataset(manifest, distance_task(), SplitSpec(seed=0))
        path = tmp_path / "train.rfpw"
        save_dataset_cache(splits["train"], path)
        loaded = load_dataset_cache(path)
        np.testing.assert_array_equal(loaded.windows, splits["train"].windows)
        np.testing.assert_array_equal(loaded.labels, splits["train"].labels)
        np.testing.assert_array_equal(loaded.sources, splits["train"].sources)
        assert loaded.label_names == splits["train"].label_names
        assert loaded.task == splits["train"].task
