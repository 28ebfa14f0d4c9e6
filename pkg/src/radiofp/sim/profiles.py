"""Hardware impairment and propagation parameter records.

Devices differ only by small transmitter impairments (the fingerprint);
distances differ only by channel structure. Tap vectors are normalized to
unit energy at construction so that, after per-window normalization
downstream, distance identity is carried by tap/phase structure rather
than amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError

# "bit-similar" impairment bounds: devices must stay small/near-zero
DEFAULT_BOUNDS = {
    "iq_gain_imbalance_db": 0.5,
    "iq_phase_skew_deg": 3.0,
    "dc_offset_mag": 0.05,
    "cfo_hz": 500.0,
}


@dataclass
class DeviceProfile:
    """Transmitter hardware imperfections for one device."""

    device_id: int
    iq_gain_imbalance_db: float = 0.0
    iq_phase_skew_deg: float = 0.0
    dc_offset: complex = 0j
    cfo_hz: float = 0.0
    pa_coeffs: tuple = (1.0,)  # odd-order terms: y = sum a_i * x * |x|^(2i)

    def validate_bounds(self, bounds: dict = DEFAULT_BOUNDS) -> None:
        if abs(self.iq_gain_imbalance_db) > bounds["iq_gain_imbalance_db"]:
            raise ConfigError(f"device {self.device_id}: IQ gain imbalance exceeds bounds")
        if abs(self.iq_phase_skew_deg) > bounds["iq_phase_skew_deg"]:
            raise ConfigError(f"device {self.device_id}: IQ phase skew exceeds bounds")
        if abs(self.dc_offset) > bounds["dc_offset_mag"]:
            raise ConfigError(f"device {self.device_id}: DC offset exceeds bounds")
        if abs(self.cfo_hz) > bounds["cfo_hz"]:
            raise ConfigError(f"device {self.device_id}: CFO exceeds bounds")

    def to_dict(self) -> dict:
        return {
            "device_id": self.device_id,
            "iq_gain_imbalance_db": self.iq_gain_imbalance_db,
            "iq_phase_skew_deg": self.iq_phase_skew_deg,
            "dc_offset": [self.dc_offset.real, self.dc_offset.imag],
            "cfo_hz": self.cfo_hz,
            "pa_coeffs": list(self.pa_coeffs),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceProfile":
        return cls(
            device_id=int(d["device_id"]),
            iq_gain_imbalance_db=float(d["iq_gain_imbalance_db"]),
            iq_phase_skew_deg=float(d["iq_phase_skew_deg"]),
            dc_offset=complex(d["dc_offset"][0], d["dc_offset"][1]),
            cfo_hz=float(d["cfo_hz"]),
            pa_coeffs=tuple(d["pa_coeffs"]),
        )


@dataclass
class ChannelProfile:
    """Propagation environment for one transmitter placement."""

    distance_ft: float
    path_loss: float = 1.0
    taps: tuple = (1.0 + 0j,)  # complex FIR, normalized to unit energy below
    phase_noise_std: float = 0.0  # rad/sample random-walk increment
    snr_db: float = math.inf
    run_jitter: float = 0.0  # per-run tap/phase perturbation scale

    normalized_taps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        taps = np.asarray(self.taps, dtype=np.complex128)
        if taps.size < 1:
            raise ConfigError("channel requires at least one tap")
        energy = np.sum(np.abs(taps) ** 2)
        if energy == 0:
            raise ConfigError("channel taps must carry energy")
        self.normalized_taps = taps / np.sqrt(energy)

    def to_dict(self) -> dict:
        return {
            "distance_ft": self.distance_ft,
            "path_loss": self.path_loss,
            "taps": [[t.real, t.imag] for t in np.asarray(self.taps, dtype=np.complex128)],
            "phase_noise_std": self.phase_noise_std,
            "snr_db": self.snr_db if math.isfinite(self.snr_db) else None,
            "run_jitter": self.run_jitter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelProfile":
        snr = d["snr_db"]
        return cls(
            distance_ft=float(d["distance_ft"]),
            path_loss=float(d["path_loss"]),
            taps=tuple(complex(re, im) for re, im in d["taps"]),
            phase_noise_std=float(d["phase_noise_std"]),
            snr_db=math.inf if snr is None else float(snr),
            run_jitter=float(d["run_jitter"]),
        )


def check_distinct_devices(devices: list[DeviceProfile]) -> None:
    """Any two device ids must differ in at least one impairment field."""
    seen = {}
    for d in devices:
        key = (
            d.iq_gain_imbalance_db,
            d.iq_phase_skew_deg,
            d.dc_offset,
            d.cfo_hz,
            tuple(d.pa_coeffs),
        )
        if key in seen:
            raise ConfigError(f"devices {seen[key]} and {d.device_id} have identical impairments")
        seen[key] = d.device_id


def check_distinct_channels(channels: list[ChannelProfile]) -> None:
    seen = {}
    for c in channels:
        key = tuple(np.round(c.normalized_taps, 12).tolist())
        if key in seen:
            raise ConfigError(f"distances {seen[key]} and {c.distance_ft} have identical tap sets")
        seen[key] = c.distance_ft
