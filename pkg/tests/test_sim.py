"""Simulator oracles: OFDM framing/power, impairment math, channel contracts."""

import math

import numpy as np
import pytest

from radiofp.errors import DataError
from radiofp.sim import (
    ChannelProfile,
    DeviceProfile,
    apply_channel,
    apply_device_impairments,
    generate_ofdm_baseband,
    run_taps,
)


class TestOfdm:
    def test_deterministic(self):
        a = generate_ofdm_baseband(123, 1000)
        b = generate_ofdm_baseband(123, 1000)
        np.testing.assert_array_equal(a, b)
        c = generate_ofdm_baseband(124, 1000)
        assert not np.array_equal(a, c)

    def test_mean_power_near_unity(self):
        x = generate_ofdm_baseband(7, 200_000)
        power = np.mean(np.abs(x) ** 2)
        assert abs(power - 1.0) < 0.02

    def test_length_multiple_of_symbol(self):
        x = generate_ofdm_baseband(0, 1000, fft_size=64, cp_len=16)
        assert len(x) % 80 == 0
        assert len(x) >= 1000

    def test_too_short_rejected(self):
        with pytest.raises(DataError):
            generate_ofdm_baseband(0, 79)


class TestImpairments:
    def test_identity_profile(self):
        x = generate_ofdm_baseband(1, 400)
        prof = DeviceProfile(device_id=0)
        y = apply_device_impairments(x, prof, 5e6)
        np.testing.assert_array_equal(y, x)

    def test_pure_cfo_rotates_constant(self):
        fs = 5e6
        f = 1000.0
        x = np.full(512, 0.7 + 0.1j)
        prof = DeviceProfile(device_id=0, cfo_hz=f)
        y = apply_device_impairments(x, prof, fs)
        np.testing.assert_allclose(np.abs(y), np.abs(x), rtol=1e-12)
        dphi = np.angle(y[1:] * np.conj(y[:-1]))
        np.testing.assert_allclose(dphi, 2 * np.pi * f / fs, rtol=1e-9)

    def test_pa_polynomial_scalar_oracle(self):
        # |x| = 0.5, coeffs [1, -0.1]: |y| = 0.5 * (1 - 0.1 * 0.25) = 0.4875
        prof = DeviceProfile(device_id=0, pa_coeffs=(1.0, -0.1))
        x = np.array([0.5 + 0j, 0.3 + 0.4j])
        y = apply_device_impairments(x, prof, 5e6)
        assert abs(abs(y[0]) - 0.4875) < 1e-12
        assert abs(abs(y[1]) - 0.5 * (1 - 0.1 * 0.25)) < 1e-12  # same magnitude input

    def test_iq_imbalance_identity_at_zero(self):
        x = np.array([1 + 2j, -0.5 + 0.25j])
        prof = DeviceProfile(device_id=0, iq_gain_imbalance_db=0.0, iq_phase_skew_deg=0.0)
        np.testing.assert_array_equal(apply_device_impairments(x, prof, 5e6), x)

    def test_iq_imbalance_mixes_conjugate(self):
        prof = DeviceProfile(device_id=0, iq_gain_imbalance_db=0.5)
        x = np.exp(1j * np.linspace(0, 4 * np.pi, 64))
        y = apply_device_impairments(x, prof, 5e6)
        g = 10 ** (0.5 / 20)
        expected = (1 + g) / 2 * x + (1 - g) / 2 * np.conj(x)
        np.testing.assert_allclose(y, expected, rtol=1e-12)

    def test_dc_offset_shifts_mean(self):
        prof = DeviceProfile(device_id=0, dc_offset=0.03 + 0.01j)
        x = generate_ofdm_baseband(2, 80_000)
        y = apply_device_impairments(x, prof, 5e6)
        assert abs(np.mean(y) - np.mean(x) - (0.03 + 0.01j)) < 1e-3


class TestChannel:
    def test_identity_channel(self):
        x = generate_ofdm_baseband(3, 800)
        prof = ChannelProfile(distance_ft=2.0, taps=(1.0,), snr_db=math.inf)
        y = apply_channel(x, prof, run=0, seed=0)
        np.testing.assert_array_equal(y, x)

    def test_awgn_snr_matches_configuration(self):
        x = generate_ofdm_baseband(4, 200_000)
        for snr_db in (5.0, 15.0, 25.0):
            prof = ChannelProfile(distance_ft=2.0, snr_db=snr_db)
            y = apply_channel(x, prof, run=0, seed=1)
            noise = y - x  # noise-free reference available here
            measured = 10 * np.log10(np.mean(np.abs(x) ** 2) / np.mean(np.abs(noise) ** 2))
            assert abs(measured - snr_db) < 0.5

    def test_seeding_contract(self):
        x = generate_ofdm_baseband(5, 2000)
        prof = ChannelProfile(distance_ft=8.0, taps=(0.8, 0.5j, 0.2), run_jitter=0.4, snr_db=20.0)
        y0a = apply_channel(x, prof, run=0, seed=9)
        y0b = apply_channel(x, prof, run=0, seed=9)
        np.testing.assert_array_equal(y0a, y0b)
        t0 = run_taps(prof, run=0, seed=9)
        t1 = run_taps(prof, run=1, seed=9)
        assert not np.allclose(t0, t1)

    def test_run_taps_unit_energy(self):
        prof = ChannelProfile(distance_ft=8.0, taps=(3.0, 4.0j), run_jitter=0.3)
        for run in (0, 1):
            t = run_taps(prof, run, seed=2)
            assert abs(np.sum(np.abs(t) ** 2) - 1.0) < 1e-12

    def test_path_loss_scales_amplitude(self):
        x = generate_ofdm_baseband(6, 800)
        prof = ChannelProfile(distance_ft=2.0, path_loss=0.25)
        y = apply_channel(x, prof, run=0, seed=0)
        np.testing.assert_allclose(y, 0.25 * x, rtol=1e-12)

    def test_phase_noise_preserves_magnitude(self):
        x = generate_ofdm_baseband(8, 4000)
        prof = ChannelProfile(distance_ft=2.0, phase_noise_std=0.01)
        y = apply_channel(x, prof, run=0, seed=3)
        np.testing.assert_allclose(np.abs(y), np.abs(x), rtol=1e-12)
