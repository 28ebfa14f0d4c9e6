"""OFDM baseband generation: random QPSK payload, no pilots, no preamble.

Whole symbols only (IFFT + cyclic prefix), scaled to unit average power.
Defaults follow common 802.11-style numerology: FFT 64, CP 16, 52 active
subcarriers around an unused DC bin.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError

FFT_SIZE = 64
CP_LEN = 16
N_ACTIVE = 52

QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=np.complex128) / np.sqrt(2)


def active_bins(fft_size: int = FFT_SIZE, n_active: int = N_ACTIVE) -> np.ndarray:
    """Subcarrier indices +-1..+-n_active/2; DC and the outer guard stay empty."""
    half = n_active // 2
    return np.concatenate([np.arange(1, half + 1), np.arange(fft_size - half, fft_size)])


def generate_ofdm_baseband(
    seed: int,
    n_samples: int,
    fft_size: int = FFT_SIZE,
    cp_len: int = CP_LEN,
    n_active: int = N_ACTIVE,
) -> np.ndarray:
    """Complex baseband of at least n_samples, rounded up to whole symbols."""
    sym_len = fft_size + cp_len
    if n_samples < sym_len:
        raise DataError(f"need at least one OFDM symbol ({sym_len} samples), got {n_samples}")
    n_sym = -(-n_samples // sym_len)  # ceil

    rng = np.random.default_rng(seed)
    data = QPSK[rng.integers(0, 4, size=(n_sym, n_active))]
    grid = np.zeros((n_sym, fft_size), dtype=np.complex128)
    grid[:, active_bins(fft_size, n_active)] = data

    # unit average power: ifft scales by 1/N, active bins carry unit symbols
    time = np.fft.ifft(grid, axis=1) * (fft_size / np.sqrt(n_active))
    symbols = np.concatenate([time[:, -cp_len:], time], axis=1)
    return symbols.reshape(-1)
