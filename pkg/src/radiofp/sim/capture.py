"""Capture generation and IQ file I/O.

Each (device, distance, run) capture is a pure function of the master seed.
Files per recording: `<stem>.iq` with little-endian interleaved float32 I/Q
pairs, plus a JSON sidecar `<stem>.json` carrying all metadata and the full
profiles. A `manifest.json` lists every recording in a dataset.

Two seed streams per capture: the payload/noise stream depends on the device,
while the channel-structure stream depends only on (distance, run), so all
devices recorded at one placement in one run share the same multipath
realization, as a sequentially-used testbed would.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError
from .channel import apply_channel
from .impairments import apply_device_impairments
from .ofdm import generate_ofdm_baseband
from .profiles import ChannelProfile, DeviceProfile

DEFAULT_SAMPLE_RATE = 5_000_000.0  # 5 MS/s


def derive_seed(master_seed: int, *tags) -> int:
    """Deterministic child seed from a master seed and hashable tags."""
    entropy = [int(master_seed)] + [zlib.crc32(str(t).encode()) for t in tags]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


@dataclass
class IQRecording:
    """One capture: complex samples plus full provenance."""

    samples: np.ndarray
    device_id: int
    distance_ft: float
    run: int
    sample_rate: float
    seed: int
    device_profile: DeviceProfile
    channel_profile: ChannelProfile

    def n_samples(self) -> int:
        return len(self.samples)


def synthesize_capture(
    device: DeviceProfile,
    channel: ChannelProfile,
    run: int,
    duration_s: float,
    master_seed: int,
    sample_rate: float = DEFAULT_SAMPLE_RATE,
) -> IQRecording:
    """Generate one capture deterministically from the master seed."""
    n = int(round(duration_s * sample_rate))
    payload_seed = derive_seed(master_seed, "payload", device.device_id, channel.distance_ft, run)
    channel_seed = derive_seed(master_seed, "channel", channel.distance_ft)
    noise_seed = derive_seed(master_seed, "noise", device.device_id, channel.distance_ft, run)

    x = generate_ofdm_baseband(payload_seed, n)[:n]
    x = apply_device_impairments(x, device, sample_rate)
    x = apply_channel(x, channel, run, channel_seed, noise_seed)
    return IQRecording(
        samples=x,
        device_id=device.device_id,
        distance_ft=channel.distance_ft,
        run=run,
        sample_rate=sample_rate,
        seed=payload_seed,
        device_profile=device,
        channel_profile=channel,
    )


def _stem(rec: IQRecording) -> str:
    dist = f"{rec.distance_ft:g}".replace(".", "p")
    return f"dev{rec.device_id:03d}_dist{dist}ft_run{rec.run}"


def write_recording(rec: IQRecording, out_dir: Path) -> dict:
    """Write `<stem>.iq` + `<stem>.json`; return the manifest entry."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = _stem(rec)
    iq_path = out_dir / f"{stem}.iq"
    iq_path.write_bytes(rec.samples.astype("<c8").tobytes())
    meta = {
        "device_id": rec.device_id,
        "distance_ft": rec.distance_ft,
        "run": rec.run,
        "sample_rate": rec.sample_rate,
        "seed": rec.seed,
        "n_samples": rec.n_samples(),
        "iq_file": iq_path.name,
        "device_profile": rec.device_profile.to_dict(),
        "channel_profile": rec.channel_profile.to_dict(),
    }
    (out_dir / f"{stem}.json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    return {"sidecar": f"{stem}.json"}


def load_recording(sidecar_path: Path) -> IQRecording:
    sidecar_path = Path(sidecar_path)
    meta = json.loads(sidecar_path.read_text())
    iq_path = sidecar_path.parent / meta["iq_file"]
    raw = np.frombuffer(iq_path.read_bytes(), dtype="<c8")
    if len(raw) != meta["n_samples"]:
        raise DataError(f"{iq_path}: expected {meta['n_samples']} samples, found {len(raw)}")
    return IQRecording(
        samples=raw.astype(np.complex128),
        device_id=meta["device_id"],
        distance_ft=meta["distance_ft"],
        run=meta["run"],
        sample_rate=meta["sample_rate"],
        seed=meta["seed"],
        device_profile=DeviceProfile.from_dict(meta["device_profile"]),
        channel_profile=ChannelProfile.from_dict(meta["channel_profile"]),
    )


def capture_dataset(
    devices: list[DeviceProfile],
    channels: list[ChannelProfile],
    out_dir: Path,
    runs: int = 2,
    duration_s: float = 0.4,
    master_seed: int = 0,
    sample_rate: float = DEFAULT_SAMPLE_RATE,
) -> Path:
    """Write |devices| x |channels| x runs recordings plus a manifest.

    Returns the manifest path.
    """
    if not devices or not channels:
        raise DataError("capture_dataset needs at least one device and one channel")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for channel in channels:
        for device in devices:
            for run in range(runs):
                rec = synthesize_capture(device, channel, run, duration_s, master_seed, sample_rate)
                entries.append(write_recording(rec, out_dir))
    manifest = {
        "master_seed": master_seed,
        "sample_rate": sample_rate,
        "duration_s": duration_s,
        "runs": runs,
        "device_ids": [d.device_id for d in devices],
        "distances_ft": [c.distance_ft for c in channels],
        "recordings": entries,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest_path


def load_manifest(manifest_path: Path) -> dict:
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    manifest["_dir"] = str(manifest_path.parent)
    return manifest


def manifest_recordings(manifest: dict):
    """Yield IQRecordings listed in a loaded manifest."""
    base = Path(manifest["_dir"])
    for entry in manifest["recordings"]:
        yield load_recording(base / entry["sidecar"])
