# -*- coding: utf-8 -*-
"""Built-in dry test sources for audition previews."""

import numpy as np
import scipy.signal

from .errors import ConfigError


def speech_like(sample_rate, seconds, seed=0):
    """Babble-shaped noise: formant-filtered with a syllabic envelope."""
    rng = np.random.default_rng(seed)
    n = int(round(seconds * sample_rate))
    noise = rng.standard_normal(n)
    out = np.zeros(n)
    for fc, gain in ((300.0, 1.0), (900.0, 0.6), (2400.0, 0.3)):
        sos = scipy.signal.butter(2, [0.7 * fc, 1.4 * fc], btype="bandpass",
                                  fs=sample_rate, output="sos")
        out += gain * scipy.signal.sosfilt(sos, noise)
    syllables = 0.5 * (1.0 + np.sin(2.0 * np.pi * 3.5 * np.arange(n) / sample_rate
                                    + rng.uniform(0, 2 * np.pi)))
    out *= syllables ** 2
    peak = np.max(np.abs(out))
    return 0.5 * out / peak if peak > 0 else out


def plucked(sample_rate, seconds, seed=0):
    """String plucks via the classic delay-line feedback loop."""
    rng = np.random.default_rng(seed)
    n = int(round(seconds * sample_rate))
    out = np.zeros(n)
    pitches = (110.0, 146.8, 196.0, 220.0)
    onset = 0
    note = 0
    while onset < n:
        period = max(int(round(sample_rate / pitches[note % len(pitches)])), 2)
        length = min(n - onset, int(1.5 * sample_rate))
        excitation = np.zeros(length)
        excitation[:period] = rng.uniform(-1.0, 1.0, min(period, length))
        feedback = np.zeros(period + 2)
        feedback[0] = 1.0
        feedback[-2:] = -0.996 * 0.5
        out[onset:onset + length] += scipy.signal.lfilter([1.0], feedback, excitation)
        onset += int(0.5 * sample_rate)
        note += 1
    peak = np.max(np.abs(out))
    return 0.5 * out / peak if peak > 0 else out


def impulse_train(sample_rate, seconds, period_s=0.25):
    n = int(round(seconds * sample_rate))
    out = np.zeros(n)
    step = max(int(round(period_s * sample_rate)), 1)
    out[::step] = 0.5
    return out


def silence(sample_rate, seconds):
    return np.zeros(int(round(seconds * sample_rate)))


SOURCES = {
    "speech": lambda fs, seconds: speech_like(fs, seconds),
    "guitar": lambda fs, seconds: plucked(fs, seconds),
    "impulses": lambda fs, seconds: impulse_train(fs, seconds),
    "silence": silence,
}


def render_source(name, sample_rate, seconds):
    """Look up and synthesize a named source."""
    try:
        make = SOURCES[name]
    except KeyError:
        raise ConfigError("unknown source %r, have: %s"
                          % (name, ", ".join(sorted(SOURCES))))
    return make(sample_rate, seconds)
