# -*- coding: utf-8 -*-
import numpy as np
import pytest
import scipy.signal

from roomshift import ambisonics as amb
from roomshift import upmix
from roomshift.errors import ConfigError

FS = 48000.0


def random_walk_doas(n, seed):
    rng = np.random.default_rng(seed)
    walk = np.cumsum(rng.standard_normal((n, 3)) * 0.02, axis=0) + [1.0, 0.2, -0.1]
    return walk / np.linalg.norm(walk, axis=1, keepdims=True)


def band_edc(x, fc, sample_rate):
    """Octave-band Schroeder energy decay curve in dB, normalized to 0."""
    hi = min(fc * np.sqrt(2.0), 0.98 * sample_rate / 2.0)
    sos = scipy.signal.butter(4, [fc / np.sqrt(2.0), hi], btype="bandpass",
                              fs=sample_rate, output="sos")
    b = scipy.signal.sosfiltfilt(sos, np.atleast_2d(x), axis=-1)
    p = np.mean(np.square(b), axis=0)
    e = np.cumsum(p[::-1])[::-1]
    return 10.0 * np.log10(e / e[0] + 1e-300)


def test_upmix_segment_first_order_block():
    rng = np.random.default_rng(50)
    signals = rng.standard_normal((4, 128))
    steering = amb.steer_tetrahedron(np.array([0.3, -0.8, 0.52]) / np.linalg.norm([0.3, -0.8, 0.52]))
    high = upmix.upmix_segment(signals, steering, 3)
    low = upmix.upmix_segment(signals, steering, 1)
    assert high.shape == (16, 128)
    assert np.allclose(high[:4], low)


def test_upmix_segment_plane_wave_is_pure_encoding():
    rng = np.random.default_rng(51)
    for _ in range(10):
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        s = rng.standard_normal(64)
        steering = amb.steer_tetrahedron(d)
        signals = np.zeros((4, 64))
        signals[0] = s
        out = upmix.upmix_segment(signals, steering, 4)
        want = np.outer(amb.real_sh(4, d), s)
        assert np.max(np.abs(out - want)) < 1e-12


def test_upmix_segment_linearity_and_omni_row():
    rng = np.random.default_rng(52)
    signals = rng.standard_normal((4, 32))
    steering = amb.steer_tetrahedron(np.array([0.0, 0.0, 1.0]))
    one = upmix.upmix_segment(signals, steering, 3)
    three = upmix.upmix_segment(3.0 * signals, steering, 3)
    assert np.allclose(three, 3.0 * one)
    assert np.allclose(upmix.upmix_segment(signals, steering, 1)[0], one[0])


def test_upmix_segment_rejects_order_zero():
    with pytest.raises(ConfigError):
        upmix.upmix_segment(np.zeros((4, 8)), amb.tetrahedron_prototype(), 0)


def test_upmix_residual_preserves_first_order():
    rng = np.random.default_rng(53)
    n = 4096
    residual = rng.standard_normal((4, n))
    doas = random_walk_doas(n, 54)
    out = upmix.upmix_residual(residual, doas, 3)
    assert out.shape == (16, n)
    assert np.max(np.abs(out[:4] - residual)) < 1e-9


def test_upmix_residual_constant_doa_plane_wave():
    rng = np.random.default_rng(55)
    n = 1024
    d = np.array([1.0, 0.0, 0.0])
    s = rng.standard_normal(n)
    residual = np.outer(amb.real_sh(1, d), s)
    doas = np.tile(d, (n, 1))
    out = upmix.upmix_residual(residual, doas, 3)
    want = np.outer(amb.real_sh(3, d), s)
    assert np.max(np.abs(out - want)) < 1e-12


def test_upmix_residual_zero_and_chunking():
    n = 300
    doas = random_walk_doas(n, 56)
    assert not np.any(upmix.upmix_residual(np.zeros((4, n)), doas, 2))
    rng = np.random.default_rng(57)
    residual = rng.standard_normal((4, n))
    whole = upmix.upmix_residual(residual, doas, 2)
    pieces = upmix.upmix_residual(residual, doas, 2, chunk=64)
    assert np.array_equal(whole, pieces)


def test_upmix_residual_validates_input():
    with pytest.raises(ConfigError):
        upmix.upmix_residual(np.zeros((4, 10)), np.zeros((5, 3)), 2)
    with pytest.raises(ConfigError):
        upmix.upmix_residual(np.zeros((4, 10)), np.zeros((10, 3)), 0)


def test_correction_matches_energy_decay_per_band():
    rng = np.random.default_rng(41)
    n = int(0.4 * FS)
    t = np.arange(n) / FS
    reference = rng.standard_normal((4, n)) * np.exp(-t / 0.08)
    order = 3
    fixture = np.zeros(((order + 1) ** 2, n))
    fixture[:4] = reference
    fixture[4:] = rng.standard_normal((fixture.shape[0] - 4, n)) * 0.5

    corrected, filters = upmix.envelope_correction(fixture, reference, FS)
    assert filters.band_centers.size == 9
    assert filters.higher_order_gains.shape[:2] == (order - 1, 9)

    groups = [list(range(l * l, (l + 1) * (l + 1))) for l in range(order + 1)]
    for fc in filters.band_centers:
        ref_edc = band_edc(reference, fc, FS)
        mask = ref_edc >= -25.0
        mask[int(0.9 * n):] = False
        for l in (2, 3):
            got = band_edc(corrected[groups[l]], fc, FS)
            assert np.max(np.abs(got[mask] - ref_edc[mask])) < 1.0, (fc, l)


def test_correction_is_idempotent_on_matching_input():
    rng = np.random.default_rng(42)
    n = int(0.25 * FS)
    t = np.arange(n) / FS
    base = rng.standard_normal(n) * np.exp(-t / 0.1)
    reference = np.tile(base, (4, 1))
    fixture = np.tile(base, (16, 1))
    corrected, filters = upmix.envelope_correction(fixture, reference, FS)
    gains = filters.higher_order_gains
    assert np.max(np.abs(20.0 * np.log10(gains))) < 0.1
    assert np.max(np.abs(20.0 * np.log10(filters.low_order_gains))) < 0.1
    scale = np.max(np.abs(fixture))
    assert np.max(np.abs(corrected - fixture)) < 0.02 * scale


def test_correction_zero_input_stays_zero():
    reference = np.zeros((4, 4800))
    corrected, _ = upmix.envelope_correction(np.zeros((9, 4800)), reference, FS)
    assert not np.any(corrected)


def test_correction_rejects_non_square_channel_count():
    with pytest.raises(ConfigError):
        upmix.envelope_correction(np.zeros((5, 100)), np.zeros((4, 100)), FS)


def test_upmixed_residual_order_property():
    wrapped = upmix.UpmixedResidual(signal=np.zeros((25, 10)), sample_rate=FS)
    assert wrapped.order == 4
