"""Classifier topologies and the distance-gated device ensemble.

Three model roles:
  - per-distance device classifiers (trained on one distance each),
  - a distance classifier over normalized windows from all distances,
  - an ensemble that concatenates every device model's one-hot output and
    applies a binary mask derived from the distance prediction, keeping
    exactly the segment of the best-estimated distance.

Argmax ties break toward the lowest index everywhere (numpy convention),
so predictions are deterministic.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import ConfigError
from .nn import (
    Network,
    batch_norm,
    conv1d,
    dense,
    dropout,
    flatten,
    max_pool1d,
    relu,
    residual_block,
    softmax_probs,
)


def build_resnet(n_classes: int, window_len: int = 256, seed: int = 0) -> Network:
    """Residual classifier: 64-filter conv, residual blocks of 128 and 256,
    pooling between every conv stage, then 256/64/n dense with 0.2 dropout."""
    if n_classes < 2:
        raise ConfigError("need at least 2 classes")
    if window_len < 8:
        raise ConfigError(f"window {window_len} too short for three pooling stages")
    specs = [
        conv1d(64, kernel=5),
        max_pool1d(2),
        residual_block(128, kernel=5),
        max_pool1d(2),
        residual_block(256, kernel=5),
        max_pool1d(2),
        batch_norm(),
        flatten(),
        dense(256),
        relu(),
        dropout(0.2),
        dense(64),
        relu(),
        dropout(0.2),
        dense(n_classes),
    ]
    return Network(specs, (2, window_len), seed=seed)


def build_baseline(n_classes: int, window_len: int = 128, seed: int = 0) -> Network:
    """Two-conv/two-dense comparison CNN (50 filters of width 7, 256/80 dense)."""
    if n_classes < 2:
        raise ConfigError("need at least 2 classes")
    if window_len < 4:
        raise ConfigError(f"window {window_len} too short for two pooling stages")
    specs = [
        conv1d(50, kernel=7),
        relu(),
        max_pool1d(2),
        conv1d(50, kernel=7),
        relu(),
        max_pool1d(2),
        flatten(),
        dense(256),
        relu(),
        dense(80),
        relu(),
        dense(n_classes),
    ]
    return Network(specs, (2, window_len), seed=seed)


def _check_normalized(x: np.ndarray) -> None:
    power = float(np.mean(x.astype(np.float64) ** 2) * 2)  # mean |z|^2 over windows
    if abs(power - 1.0) > 0.05:
        warnings.warn(f"input windows look unnormalized (mean power {power:.3f})", stacklevel=3)


@dataclass
class DeviceClassifier:
    """Predicts which device transmitted, assuming a fixed capture distance."""

    net: Network
    distance_ft: float
    n_devices: int
    label_names: list[str]

    def __post_init__(self):
        if self.net.output_shape != (self.n_devices,):
            raise ConfigError(
                f"device classifier outputs {self.net.output_shape}, expected ({self.n_devices},)"
            )


@dataclass
class DistanceClassifier:
    """Predicts the transmitter distance from a normalized window."""

    net: Network
    distance_labels: list[float]

    def __post_init__(self):
        if self.net.output_shape != (len(self.distance_labels),):
            raise ConfigError(
                f"distance classifier outputs {self.net.output_shape}, "
                f"expected ({len(self.distance_labels)},)"
            )

    @property
    def label_names(self) -> list[str]:
        return [f"{d:g}ft" for d in self.distance_labels]


def _predict_batch(net: Network, x: np.ndarray, debug: bool) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x)
    if x.ndim == 2:
        x = x[None]
    if debug:
        _check_normalized(x)
    logits = net.eval().forward(x)
    probs = softmax_probs(logits.astype(np.float64))
    return probs.argmax(axis=1), probs


def predict_device(model: DeviceClassifier, window: np.ndarray, debug: bool = False):
    """(device index, probability vector) for one [2, W] window."""
    idx, probs = _predict_batch(model.net, window, debug)
    return int(idx[0]), probs[0]


def predict_device_batch(model: DeviceClassifier, windows: np.ndarray, debug: bool = False):
    return _predict_batch(model.net, windows, debug)


def predict_distance(model: DistanceClassifier, window: np.ndarray, debug: bool = False):
    """(distance label, probability vector) for one [2, W] window."""
    idx, probs = _predict_batch(model.net, window, debug)
    return model.distance_labels[int(idx[0])], probs[0]


def predict_distance_batch(model: DistanceClassifier, windows: np.ndarray, debug: bool = False):
    return _predict_batch(model.net, windows, debug)


@dataclass
class EnsembleModel:
    """Distance classifier gating one device classifier per distance."""

    distance_model: DistanceClassifier
    device_models: list[DeviceClassifier]

    def __post_init__(self):
        labels = self.distance_model.distance_labels
        if len(self.device_models) != len(labels):
            raise ConfigError(
                f"{len(self.device_models)} device models for {len(labels)} distances"
            )
        for k, (m, d) in enumerate(zip(self.device_models, labels)):
            if m.distance_ft != d:
                raise ConfigError(f"device model {k} is for {m.distance_ft} ft, slot expects {d} ft")
        sizes = {m.n_devices for m in self.device_models}
        if len(sizes) != 1:
            raise ConfigError(f"device models disagree on n_devices: {sorted(sizes)}")

    @property
    def n_distances(self) -> int:
        return len(self.device_models)

    @property
    def n_devices(self) -> int:
        return self.device_models[0].n_devices


def ensemble_predict_batch(ens: EnsembleModel, windows: np.ndarray, debug: bool = False):
    """Masked-concatenation prediction for a [B, 2, W] batch.

    Returns (distance indices, device indices, masked [B, D*M] vectors).
    Every device model's one-hot output joins the concatenation; the binary
    mask keeps only the segment of the predicted distance, so the surviving
    one-hot is the routed model's prediction.
    """
    windows = np.asarray(windows)
    if windows.ndim == 2:
        windows = windows[None]
    n_dev = ens.n_devices
    d_idx, _ = _predict_batch(ens.distance_model.net, windows, debug)

    batch = windows.shape[0]
    concat = np.zeros((batch, ens.n_distances * n_dev))
    for k, model in enumerate(ens.device_models):
        m_idx, _ = _predict_batch(model.net, windows, False)
        concat[np.arange(batch), k * n_dev + m_idx] = 1.0

    mask = np.zeros_like(concat)
    for k in range(ens.n_distances):
        rows = d_idx == k
        mask[rows, k * n_dev : (k + 1) * n_dev] = 1.0
    masked = concat * mask
    m_idx = masked.argmax(axis=1) - d_idx * n_dev
    return d_idx, m_idx, masked


def ensemble_predict(ens: EnsembleModel, window: np.ndarray, debug: bool = False):
    """(distance label, device index, masked vector) for one window."""
    d_idx, m_idx, masked = ensemble_predict_batch(ens, window, debug)
    return ens.distance_model.distance_labels[int(d_idx[0])], int(m_idx[0]), masked[0]


# -- ensemble checkpointing ---------------------------------------------


def save_ensemble(ens: EnsembleModel, out_dir: Path) -> Path:
    """Manifest plus |D|+1 network checkpoints; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(ens.distance_model.net, out_dir / "distance.ckpt")
    entries = []
    for model in ens.device_models:
        stem = f"{model.distance_ft:g}".replace(".", "p")
        name = f"device_{stem}ft.ckpt"
        save_checkpoint(model.net, out_dir / name)
        entries.append(
            {
                "file": name,
                "distance_ft": model.distance_ft,
                "n_devices": model.n_devices,
                "label_names": model.label_names,
            }
        )
    manifest = {
        "distance_labels": ens.distance_model.distance_labels,
        "distance_file": "distance.ckpt",
        "device_models": entries,
    }
    path = out_dir / "ensemble.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return path


def load_ensemble(manifest_path: Path) -> EnsembleModel:
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    manifest = json.loads(manifest_path.read_text())
    distance_model = DistanceClassifier(
        net=load_checkpoint(base / manifest["distance_file"]),
        distance_labels=[float(d) for d in manifest["distance_labels"]],
    )
    device_models = [
        DeviceClassifier(
            net=load_checkpoint(base / e["file"]),
            distance_ft=float(e["distance_ft"]),
            n_devices=int(e["n_devices"]),
            label_names=list(e["label_names"]),
        )
        for e in manifest["device_models"]
    ]
    return EnsembleModel(distance_model=distance_model, device_models=device_models)
