"""Propagation channel: run-perturbed multipath, path loss, phase noise, AWGN.

The run index and seed determine the tap perturbation, so run 0 and run 1 of
the same placement see structurally different channels while repeated calls
are bit-identical. Noise draws come from a separate stream so that different
captures sharing one channel realization still get independent noise.
"""

from __future__ import annotations

import math
import zlib

import numpy as np

from .profiles import ChannelProfile


def _stream(seed, *tags) -> np.random.Generator:
    entropy = [int(seed)] + [zlib.crc32(str(t).encode()) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def run_taps(profile: ChannelProfile, run: int, seed: int) -> np.ndarray:
    """Unit-energy taps for one run: base taps plus seeded complex jitter."""
    taps = profile.normalized_taps
    if profile.run_jitter == 0.0:
        return taps
    rng = _stream(seed, "taps", run)
    jitter = (rng.standard_normal(taps.size) + 1j * rng.standard_normal(taps.size)) / math.sqrt(2 * taps.size)
    perturbed = taps + profile.run_jitter * jitter
    return perturbed / np.sqrt(np.sum(np.abs(perturbed) ** 2))


def apply_channel(
    signal: np.ndarray,
    profile: ChannelProfile,
    run: int,
    seed: int,
    noise_seed: int | None = None,
) -> np.ndarray:
    """Convolve with run-perturbed taps, scale, add phase noise and AWGN."""
    taps = run_taps(profile, run, seed)
    if taps.size == 1:
        y = signal * taps[0]
    else:
        y = np.convolve(signal, taps)[: len(signal)]
    y = y * profile.path_loss

    noise_rng = _stream(noise_seed if noise_seed is not None else seed, "noise", run)
    if profile.phase_noise_std > 0.0:
        increments = noise_rng.standard_normal(len(y)) * profile.phase_noise_std
        y = y * np.exp(1j * np.cumsum(increments))

    if math.isfinite(profile.snr_db):
        p_sig = float(np.mean(np.abs(y) ** 2))
        p_noise = p_sig / (10.0 ** (profile.snr_db / 10.0))
        scale = math.sqrt(p_noise / 2.0)
        y = y + scale * (noise_rng.standard_normal(len(y)) + 1j * noise_rng.standard_normal(len(y)))
    return y
