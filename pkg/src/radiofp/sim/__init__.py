"""Synthetic radio capture: OFDM baseband, device impairments, channels."""

from .capture import (
    DEFAULT_SAMPLE_RATE,
    IQRecording,
    capture_dataset,
    derive_seed,
    load_manifest,
    load_recording,
    manifest_recordings,
    synthesize_capture,
    write_recording,
)
from .channel import apply_channel, run_taps
from .impairments import apply_device_impairments
from .ofdm import generate_ofdm_baseband
from .profiles import ChannelProfile, DeviceProfile, check_distinct_channels, check_distinct_devices

__all__ = [
    "DEFAULT_SAMPLE_RATE",
    "ChannelProfile",
    "DeviceProfile",
    "IQRecording",
    "apply_channel",
    "apply_device_impairments",
    "capture_dataset",
    "check_distinct_channels",
    "check_distinct_devices",
    "derive_seed",
    "generate_ofdm_baseband",
    "load_manifest",
    "load_recording",
    "manifest_recordings",
    "run_taps",
    "synthesize_capture",
    "write_recording",
]
