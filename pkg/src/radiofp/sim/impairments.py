"""Transmitter impairment chain.

Applied in a fixed, documented order:
  1. IQ imbalance      y = mu*x + nu*conj(x), mu = (1 + g e^{j theta})/2,
                       nu = (1 - g e^{j theta})/2 (g from dB, theta from deg)
  2. DC offset         y += c
  3. PA nonlinearity   y = sum_i a_i * y * |y|^(2i)   (memoryless, odd orders)
  4. CFO rotation      y *= exp(j 2 pi f n / fs)
"""

from __future__ import annotations

import numpy as np

from .profiles import DeviceProfile


def iq_imbalance(x: np.ndarray, gain_db: float, phase_deg: float) -> np.ndarray:
    if gain_db == 0.0 and phase_deg == 0.0:
        return x
    g = 10.0 ** (gain_db / 20.0)
    rot = g * np.exp(1j * np.deg2rad(phase_deg))
    mu = (1.0 + rot) / 2.0
    nu = (1.0 - rot) / 2.0
    return mu * x + nu * np.conj(x)


def pa_polynomial(x: np.ndarray, coeffs) -> np.ndarray:
    coeffs = tuple(coeffs)
    if coeffs == (1.0,):
        return x
    mag2 = np.abs(x) ** 2
    gain = np.zeros_like(mag2)
    for a in reversed(coeffs):  # Horner in |x|^2
        gain = gain * mag2 + a
    return x * gain


def cfo_rotation(x: np.ndarray, cfo_hz: float, sample_rate: float) -> np.ndarray:
    if cfo_hz == 0.0:
        return x
    n = np.arange(len(x))
    return x * np.exp(2j * np.pi * cfo_hz * n / sample_rate)


def apply_device_impairments(signal: np.ndarray, profile: DeviceProfile, sample_rate: float) -> np.ndarray:
    y = iq_imbalance(signal, profile.iq_gain_imbalance_db, profile.iq_phase_skew_deg)
    if profile.dc_offset != 0:
        y = y + profile.dc_offset
    y = pa_polynomial(y, profile.pa_coeffs)
    return cfo_rotation(y, profile.cfo_hz, sample_rate)
