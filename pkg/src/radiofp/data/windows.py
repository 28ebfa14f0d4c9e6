"""Non-overlapping window extraction and per-window normalization.

Recordings are tiled into length-W windows (trailing remainder dropped);
each window is scaled to unit RMS in the complex domain, so received power
carries no information downstream and phase structure is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import DataError
from ..sim.capture import IQRecording

DEFAULT_WINDOW = 256


@dataclass
class Window:
    """One length-W slice of a recording, tagged with its provenance."""

    iq: np.ndarray
    normalized: bool
    source: tuple  # (device_id, distance_ft, run, window_index)


def partition_windows(recording: IQRecording, window_len: int = DEFAULT_WINDOW) -> list[Window]:
    """Tile the recording into floor(n/W) non-overlapping windows."""
    if window_len < 1:
        raise DataError(f"window length must be >= 1, got {window_len}")
    n_win = len(recording.samples) // window_len
    out = []
    for i in range(n_win):
        seg = recording.samples[i * window_len : (i + 1) * window_len]
        out.append(
            Window(
                iq=np.array(seg),
                normalized=False,
                source=(recording.device_id, recording.distance_ft, recording.run, i),
            )
        )
    return out


def rms(iq: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(iq) ** 2)))


def normalize_window(w: Window) -> Window:
    """Scale to unit RMS; phases are unchanged. All-zero windows are rejected."""
    scale = rms(w.iq)
    if scale == 0.0:
        raise DataError(f"cannot normalize an all-zero window (source {w.source})")
    return replace(w, iq=w.iq / scale, normalized=True)


def normalize_block(iq: np.ndarray) -> np.ndarray:
    """Vectorized unit-RMS normalization of stacked windows [n, W]."""
    power = np.mean(np.abs(iq) ** 2, axis=1, keepdims=True)
    if np.any(power == 0.0):
        raise DataError("cannot normalize an all-zero window")
    return iq / np.sqrt(power)


def to_tensor(w: Window) -> np.ndarray:
    """[2, W] real tensor: row 0 = I (real), row 1 = Q (imag)."""
    return np.stack([w.iq.real, w.iq.imag])


def from_tensor(t: np.ndarray) -> np.ndarray:
    """Inverse of to_tensor."""
    return t[0] + 1j * t[1]


def block_to_tensor(iq: np.ndarray, dtype=np.float32) -> np.ndarray:
    """Stacked windows [n, W] complex -> [n, 2, W] real."""
    return np.stack([iq.real, iq.imag], axis=1).astype(dtype)
