"""Labeled window datasets with the two split strategies.

Tasks:
  - device_task(j): classify the transmitting device among windows captured
    at distance j only.
  - distance_task(): classify the capture distance from normalized windows
    across all devices.

Splits:
  - pooled_runs: both runs pooled, stratified seeded shuffle per class
    (classes truncated to a common count so train stays balanced).
  - run_holdout: run 0 trains; the held-out run 1 supplies val and test.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DataError
from ..sim.capture import manifest_recordings
from .windows import DEFAULT_WINDOW, block_to_tensor, normalize_block

MAGIC = b"RFPW"
CACHE_VERSION = 1


@dataclass(frozen=True)
class Task:
    kind: str  # "device" | "distance"
    distance_ft: float | None = None

    def __post_init__(self):
        if self.kind not in ("device", "distance"):
            raise ConfigError(f"unknown task kind {self.kind!r}")
        if self.kind == "device" and self.distance_ft is None:
            raise ConfigError("device task requires a distance")

    def name(self) -> str:
        return f"device@{self.distance_ft:g}ft" if self.kind == "device" else "distance"


def device_task(distance_ft: float) -> Task:
    return Task("device", float(distance_ft))


def distance_task() -> Task:
    return Task("distance")


@dataclass
class SplitSpec:
    mode: str = "pooled_runs"  # or "run_holdout"
    fractions: tuple = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("pooled_runs", "run_holdout"):
            raise ConfigError(f"unknown split mode {self.mode!r}")
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions):
            raise ConfigError("fractions must be three positive values")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ConfigError(f"fractions must sum to 1, got {sum(self.fractions)}")


@dataclass
class LabeledDataset:
    """Stacked [n, 2, W] float32 windows with integer labels."""

    windows: np.ndarray
    labels: np.ndarray
    task: str
    label_names: list[str]
    split: str
    sources: np.ndarray = field(repr=False)  # [n, 4]: device, distance, run, window_index

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    def subset(self, idx: np.ndarray, split: str | None = None) -> "LabeledDataset":
        return LabeledDataset(
            windows=self.windows[idx],
            labels=self.labels[idx],
            task=self.task,
            label_names=self.label_names,
            split=split or self.split,
            sources=self.sources[idx],
        )


def _collect_windows(manifest: dict, task: Task, window_len: int, normalize: bool):
    """Window every matching recording; returns (tensor, labels, sources, names)."""
    blocks, labels, sources = [], [], []
    if task.kind == "device":
        classes = sorted(manifest["device_ids"])
        names = [f"dev{c}" for c in classes]
    else:
        classes = sorted(manifest["distances_ft"])
        names = [f"{c:g}ft" for c in classes]
    index = {c: i for i, c in enumerate(classes)}

    for rec in manifest_recordings(manifest):
        if task.kind == "device" and rec.distance_ft != task.distance_ft:
            continue
        n_win = len(rec.samples) // window_len
        if n_win == 0:
            continue
        iq = rec.samples[: n_win * window_len].reshape(n_win, window_len)
        if normalize:
            iq = normalize_block(iq)
        blocks.append(block_to_tensor(iq))
        label = index[rec.device_id] if task.kind == "device" else index[rec.distance_ft]
        labels.append(np.full(n_win, label, dtype=np.int64))
        src = np.zeros((n_win, 4), dtype=np.float64)
        src[:, 0] = rec.device_id
        src[:, 1] = rec.distance_ft
        src[:, 2] = rec.run
        src[:, 3] = np.arange(n_win)
        sources.append(src)

    if not blocks:
        raise ConfigError(f"no recordings match task {task.name()}")
    return (
        np.concatenate(blocks),
        np.concatenate(labels),
        np.concatenate(sources),
        names,
    )


def _stratified_three_way(labels, n_classes, fractions, rng):
    """Per-class seeded shuffle -> (train, val, test) index arrays.

    Classes are truncated to the smallest class count so the train split
    stays balanced (counts differ by at most 0 across classes).
    """
    per_class = [np.flatnonzero(labels == c) for c in range(n_classes)]
    n_min = min(len(ix) for ix in per_class)
    tr, va, te = [], [], []
    n_tr = int(n_min * fractions[0])
    n_va = int(n_min * fractions[1])
    for ix in per_class:
        ix = rng.permutation(ix)[:n_min]
        tr.append(ix[:n_tr])
        va.append(ix[n_tr : n_tr + n_va])
        te.append(ix[n_tr + n_va :])
    order = lambda parts: rng.permutation(np.concatenate(parts))
    return order(tr), order(va), order(te)


def build_dataset(
    manifest: dict,
    task: Task,
    split: SplitSpec,
    window_len: int = DEFAULT_WINDOW,
    normalize: bool = True,
) -> dict:
    """Windows -> normalized tensors -> {train, val, test} LabeledDatasets."""
    tensor, labels, sources, names = _collect_windows(manifest, task, window_len, normalize)
    full = LabeledDataset(tensor, labels, task.name(), names, "all", sources)
    rng = np.random.default_rng(split.seed)

    if split.mode == "pooled_runs":
        tr, va, te = _stratified_three_way(labels, full.n_classes, split.fractions, rng)
    else:
        held_out = sources[:, 2] == 1
        tr = rng.permutation(np.flatnonzero(~held_out))
        rest = np.flatnonzero(held_out)
        if len(rest) == 0:
            raise ConfigError("run_holdout requires run-1 recordings")
        f_val = split.fractions[1] / (split.fractions[1] + split.fractions[2])
        rest = rng.permutation(rest)
        n_va = int(len(rest) * f_val)
        va, te = rest[:n_va], rest[n_va:]

    out = {
        "train": full.subset(tr, "train"),
        "val": full.subset(va, "val"),
        "test": full.subset(te, "test"),
    }
    present = np.unique(out["train"].labels)
    if len(present) != full.n_classes:
        missing = sorted(set(range(full.n_classes)) - set(present.tolist()))
        raise ConfigError(f"train split is missing classes {missing} for task {task.name()}")
    return out


def save_dataset_cache(ds: LabeledDataset, path: Path) -> None:
    """Binary cache: header JSON, int32 labels, float64 sources, float32 block."""
    path = Path(path)
    header = {
        "task": ds.task,
        "split": ds.split,
        "label_names": ds.label_names,
        "n": len(ds),
        "window_len": ds.windows.shape[2],
    }
    hbytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.uint32(CACHE_VERSION).tobytes())
        f.write(np.uint32(len(hbytes)).tobytes())
        f.write(hbytes)
        f.write(ds.labels.astype("<i4").tobytes())
        f.write(ds.sources.astype("<f8").tobytes())
        f.write(ds.windows.astype("<f4").tobytes())


def load_dataset_cache(path: Path) -> LabeledDataset:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise DataError(f"{path}: not a dataset cache")
    version = int(np.frombuffer(raw[4:8], dtype="<u4")[0])
    if version != CACHE_VERSION:
        raise DataError(f"{path}: unsupported cache version {version}")
    hlen = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    header = json.loads(raw[12 : 12 + hlen].decode())
    n, w = header["n"], header["window_len"]
    off = 12 + hlen
    labels = np.frombuffer(raw[off : off + 4 * n], dtype="<i4").astype(np.int64)
    off += 4 * n
    sources = np.frombuffer(raw[off : off + 8 * 4 * n], dtype="<f8").reshape(n, 4)
    off += 8 * 4 * n
    expected = 4 * n * 2 * w
    block = raw[off : off + expected]
    if len(block) != expected:
        raise DataError(f"{path}: truncated window block")
    windows = np.frombuffer(block, dtype="<f4").reshape(n, 2, w)
    return LabeledDataset(
        windows=windows.copy(),
        labels=labels,
        task=header["task"],
        label_names=list(header["label_names"]),
        split=header["split"],
        sources=sources.copy(),
    )
