# -*- coding: utf-8 -*-
"""Fractional sample delays via cubic Lagrange interpolation."""

import numpy as np


def lagrange_coeffs(frac):
    """Four interpolation taps for a fractional offset in [0, 1).

    The taps weight samples at integer offsets -1, 0, 1, 2 relative to
    the truncated delay. A zero fraction yields [0, 1, 0, 0] exactly.
    """
    f = float(frac)
    if not 0.0 <= f < 1.0:
        raise ValueError("fractional part must lie in [0, 1)")
    return np.array([
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ])


def lagrange_taps(frac):
    """Vectorized `lagrange_coeffs`: taps stacked on a leading axis of 4."""
    f = np.asarray(frac, dtype=float)
    return np.stack([
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ])


def split_delay(delay_samples):
    """Integer part and fractional part in [0, 1) of a delay."""
    d = float(delay_samples)
    i = int(np.floor(d))
    return i, d - i


def fractional_shift(x, delay_samples, n_out=None):
    """Delay a signal by a possibly fractional number of samples.

    Positive delays shift content later in time. The output is zero
    padded and has `n_out` samples (defaults to fitting the shifted
    signal, including the interpolator tail).

    Parameters
    ----------
    x : (..., n) ndarray
    delay_samples : float
        May be negative; content shifted before sample zero is lost.
    n_out : int, optional
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    whole, frac = split_delay(delay_samples)
    if n_out is None:
        n_out = max(n + whole + (2 if frac else 0), 0)
    out = np.zeros(x.shape[:-1] + (n_out,))
    if n_out == 0:
        return out

    if frac == 0.0:
        src_lo = max(-whole, 0)
        dst_lo = max(whole, 0)
        count = min(n - src_lo, n_out - dst_lo)
        if count > 0:
            out[..., dst_lo:dst_lo + count] = x[..., src_lo:src_lo + count]
        return out

    taps = lagrange_coeffs(frac)
    # Tap k weights x[t - whole - k + 1] into out[t], k = 0..3.
    for k, c in enumerate(taps):
        shift = whole + k - 1
        src_lo = max(-shift, 0)
        dst_lo = max(shift, 0)
        count = min(n - src_lo, n_out - dst_lo)
        if count > 0:
            out[..., dst_lo:dst_lo + count] += c * x[..., src_lo:src_lo + count]
    return out
