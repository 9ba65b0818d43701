# -*- coding: utf-8 -*-
"""First-order feature extraction from an Ambisonic room impulse response.

Two per-sample features feed the rest of the offline stage: a direction
of arrival track from the time-averaged pseudo intensity vector, and a
short-time amplitude envelope from the Hamming-smoothed broadband
intensity magnitude. Both are computed from the first four (ACN 0..3)
channels only, regardless of the input order.
"""

from dataclasses import dataclass

import numpy as np
import scipy.ndimage
import scipy.signal

from . import ambisonics
from .errors import ConfigError, UnsupportedInputError

#: Default zero-phase bandpass edges for the DOA analysis, Hz.
DOA_BAND = (200.0, 3000.0)

#: Averaging windows, seconds.
DOA_AVG_TIME = 0.25e-3
AMPLITUDE_AVG_TIME = 0.5e-3

#: Direction reported while the intensity vector magnitude underflows
#: and no earlier valid direction exists.
FALLBACK_DIRECTION = np.array([1.0, 0.0, 0.0])

#: Relative intensity magnitude below which normalization is considered
#: undefined and the previous valid direction is held.
UNDERFLOW_RATIO = 1e-12


@dataclass
class Arir:
    """Multichannel Ambisonic impulse response, channel-major samples.

    ``samples`` has shape (channels, length) with ACN ordering and N3D
    normalization; ``channels`` must be a perfect square (order+1)**2.
    """

    samples: np.ndarray
    sample_rate: float
    convention: str = "acn/n3d"

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if self.sample_rate <= 0:
            raise ConfigError(f"sample rate must be positive, got {self.sample_rate}")
        order = ambisonics.order_from_channels(self.samples.shape[0])
        if order is None:
            raise UnsupportedInputError(
                f"channel count {self.samples.shape[0]} is not a square (order+1)**2"
            )
        if not np.all(np.isfinite(self.samples)):
            raise UnsupportedInputError("impulse response contains non-finite samples")

    @property
    def order(self):
        return ambisonics.order_from_channels(self.samples.shape[0])

    @property
    def n_samples(self):
        return self.samples.shape[1]


def odd_window_samples(duration_s, sample_rate):
    """Window length in samples, rounded to the nearest odd count >= 1."""
    n = int(round(duration_s * sample_rate))
    if n % 2 == 0:
        n += 1
    return max(n, 1)


def bandpass_zero_phase(x, f_lo, f_hi, sample_rate):
    """Zero-phase Butterworth bandpass (4th order, applied forward-backward).

    The signal is zero-padded at both ends so the filter transients decay
    outside the original support; group delay is zero at all frequencies.

    Parameters
    ----------
    x : (..., n) array_like
    f_lo, f_hi : float
        Band edges in Hz, 0 < f_lo < f_hi < sample_rate / 2.
    sample_rate : float

    Returns
    -------
    y : ndarray, same shape as `x`.
    """
    if not (0.0 < f_lo < f_hi < sample_rate / 2.0):
        raise ConfigError(
            f"invalid band edges ({f_lo}, {f_hi}) Hz at sample rate {sample_rate} Hz"
        )
    x = np.asarray(x, dtype=float)
    sos = scipy.signal.butter(4, [f_lo, f_hi], btype="bandpass", fs=sample_rate, output="sos")
    pad = int(round(0.05 * sample_rate))
    width = [(0, 0)] * (x.ndim - 1) + [(pad, pad)]
    padded = np.pad(x, width)
    y = scipy.signal.sosfiltfilt(sos, padded, axis=-1, padtype=None)
    return y[..., pad:-pad]


def _smooth(x, window):
    """Centered zero-phase FIR smoothing with zero padding at the edges."""
    return scipy.ndimage.convolve1d(x, window, axis=-1, mode="constant", cval=0.0)


def pseudo_intensity(arir, bandpass=True):
    """Instantaneous pseudo intensity vector W * [X, Y, Z], shape (n, 3).

    ACN channels 1..3 hold the (y, z, x) dipoles, so the product is
    reordered into Cartesian (x, y, z) components. With ``bandpass`` the
    first-order channels are zero-phase bandpass filtered first.
    """
    if arir.order < 1:
        raise UnsupportedInputError("pseudo intensity needs a first-order (4 channel) input")
    h = arir.samples[:4]
    if bandpass:
        h = bandpass_zero_phase(h, DOA_BAND[0], DOA_BAND[1], arir.sample_rate)
    w = h[0]
    # ACN: channel 1 = y dipole, 2 = z, 3 = x
    return np.stack([w * h[3], w * h[1], w * h[2]], axis=-1)


def doa_track(arir):
    """Per-sample direction of arrival from the time-averaged intensity.

    The bandpassed intensity vector is smoothed with a zero-phase moving
    average over 0.25 ms and normalized per sample. Where its magnitude
    underflows, the previous valid direction is held (the +x axis before
    any valid sample).

    Parameters
    ----------
    arir : Arir
        Input of order >= 1.

    Returns
    -------
    directions : (n, 3) ndarray
        Unit direction vectors, one per sample.
    """
    intensity = pseudo_intensity(arir, bandpass=True)
    window = np.ones(odd_window_samples(DOA_AVG_TIME, arir.sample_rate))
    window /= window.sum()
    averaged = _smooth(intensity.T, window).T

    mags = np.linalg.norm(averaged, axis=-1)
    floor = UNDERFLOW_RATIO * mags.max() if mags.size else 0.0
    valid = mags > floor
    directions = np.empty_like(averaged)
    directions[valid] = averaged[valid] / mags[valid, None]

    if not valid.all():
        # hold the most recent valid direction through underflow gaps
        idx = np.where(valid, np.arange(valid.size), -1)
        idx = np.maximum.accumulate(idx)
        leading = idx < 0
        directions[~valid & ~leading] = directions[idx[~valid & ~leading]]
        directions[leading] = FALLBACK_DIRECTION
    return directions


def short_time_amplitude(arir):
    """Short-time amplitude envelope of the broadband intensity magnitude.

    A Hamming-windowed moving average over 0.5 ms (unit window sum,
    centered, zero padded) smooths the instantaneous intensity magnitude;
    the square root restores amplitude scaling, so the envelope is
    homogeneous of degree one in the input.

    Returns
    -------
    envelope : (n,) ndarray, nonnegative.
    """
    intensity = pseudo_intensity(arir, bandpass=False)
    mag = np.linalg.norm(intensity, axis=-1)
    window = scipy.signal.windows.hamming(
        odd_window_samples(AMPLITUDE_AVG_TIME, arir.sample_rate), sym=True
    )
    window /= window.sum()
    return np.sqrt(_smooth(mag, window))
