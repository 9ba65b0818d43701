# -*- coding: utf-8 -*-
import numpy as np
import pytest

from roomshift import sources
from roomshift.errors import ConfigError

FS = 48000.0


@pytest.mark.parametrize("name", sorted(sources.SOURCES))
def test_sources_render_finite_and_bounded(name):
    x = sources.render_source(name, FS, 1.0)
    assert x.shape == (48000,)
    assert np.all(np.isfinite(x))
    assert np.max(np.abs(x)) <= 0.5 + 1e-9


def test_sources_are_reproducible():
    a = sources.render_source("speech", FS, 0.5)
    b = sources.render_source("speech", FS, 0.5)
    assert np.array_equal(a, b)


def test_speech_has_syllabic_modulation():
    x = sources.speech_like(FS, 2.0)
    frame = 2400  # 50 ms
    rms = np.sqrt(np.mean(x[: len(x) // frame * frame].reshape(-1, frame) ** 2, axis=1))
    assert rms.max() > 4.0 * max(rms.min(), 1e-9)


def test_plucked_has_harmonic_spectrum():
    x = sources.plucked(FS, 0.5)
    spec = np.abs(np.fft.rfft(x * np.hanning(x.size)))
    freqs = np.fft.rfftfreq(x.size, 1.0 / FS)
    fundamental = 110.0
    peak = spec[(freqs > 100) & (freqs < 120)].max()
    gap = spec[(freqs > 140) & (freqs < 160)].max()  # between partials
    assert peak > 5.0 * gap


def test_impulse_train_spacing():
    x = sources.impulse_train(FS, 1.0, period_s=0.25)
    hits = np.flatnonzero(x)
    assert np.array_equal(hits, [0, 12000, 24000, 36000])


def test_silence_is_silent():
    assert not np.any(sources.silence(FS, 0.3))


def test_unknown_source():
    with pytest.raises(ConfigError, match="unknown source"):
        sources.render_source("kazoo", FS, 1.0)
