# -*- coding: utf-8 -*-
"""Directional enhancement to higher Ambisonic order.

Sound-event segments are re-encoded from their four directional signals
with the steered tetrahedral encoding matrix. The first-order residual
is re-encoded per sample along the time-varying DOA track; because the
tetrahedron resolves the first-order identity, its first four channels
stay bit-compatible with the residual. An octave-band envelope
correction repairs the spectral whitening that fast DOA fluctuations
cause in the higher orders.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.ndimage
import scipy.signal

from . import ambisonics
from .errors import ConfigError

#: Octave band centers for the envelope correction, Hz.
OCTAVE_CENTERS = (63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0)

#: RMS smoothing time for envelope measurement, seconds.
ENVELOPE_SMOOTHING = 0.002

_GAIN_LIMITS = (1e-3, 1e2)


@dataclass
class CorrectionFilters:
    """Band gains actually applied by the envelope correction.

    ``low_order_gains[g]`` holds the static band gains of order group g
    (0 = omni, 1 = dipoles). ``higher_order_gains[g]`` holds the
    time-varying band gains of order group g+2, sampled on a grid of
    ``block_hop`` samples, shape (bands, blocks).
    """

    band_centers: np.ndarray
    block_hop: int
    low_order_gains: np.ndarray
    higher_order_gains: np.ndarray


@dataclass
class UpmixedResidual:
    """Higher-order residual and the correction applied to it."""

    signal: np.ndarray
    sample_rate: float
    correction: Optional[CorrectionFilters] = None

    @property
    def order(self):
        return ambisonics.order_from_channels(self.signal.shape[0])


def upmix_segment(signals, steering, order):
    """Re-encode four directional signals at `order`, shape (C, n)."""
    if order < 1:
        raise ConfigError("upmix order must be >= 1")
    return ambisonics.sh_reencode_matrix(steering, order) @ signals


def upmix_residual(residual, doa_directions, order, chunk=1 << 16):
    """Higher-order re-encoding of the residual along its DOA track.

    Per sample, the tetrahedron is steered towards the current DOA; the
    residual is decomposed into the four steered beams and re-encoded
    at the target order. The first four output channels equal the input
    residual up to rounding.

    Parameters
    ----------
    residual : (4, n) ndarray
        First-order residual.
    doa_directions : (n, 3) ndarray
    order : int
    chunk : int
        Samples processed per vectorized slab (memory bound).

    Returns
    -------
    upmixed : ((order+1)**2, n) ndarray
    """
    if order < 1:
        raise ConfigError("upmix order must be >= 1")
    residual = np.asarray(residual, dtype=float)
    n = residual.shape[1]
    if doa_directions.shape[0] != n:
        raise ConfigError("DOA track length does not match the residual")

    out = np.empty((ambisonics.n_channels(order), n))
    proto = ambisonics.TETRAHEDRON
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        azimuth, zenith = ambisonics.cart_to_sph(doa_directions[lo:hi])
        rot = ambisonics.steering_rotations(azimuth, zenith)
        dirs = np.einsum("nij,jk->nki", rot, proto)
        sh = ambisonics.real_sh(order, dirs)
        beams = np.pi * np.einsum("nqc,cn->qn", sh[..., :4], residual[:, lo:hi])
        out[:, lo:hi] = np.einsum("nqc,qn->cn", sh, beams)
    return out


def _octave_bands(sample_rate):
    """Second-order-section bandpass bank at the octave centers."""
    nyq = sample_rate / 2.0
    bands = []
    for fc in OCTAVE_CENTERS:
        lo = fc / np.sqrt(2.0)
        hi = min(fc * np.sqrt(2.0), 0.98 * nyq)
        if lo >= hi:
            continue
        sos = scipy.signal.butter(4, [lo, hi], btype="bandpass", fs=sample_rate, output="sos")
        bands.append((fc, sos))
    return bands


def _band_split(x, sos):
    return scipy.signal.sosfiltfilt(sos, x, axis=-1)


def _rms_envelope(x, window):
    """Smoothed RMS envelope over the channel dimension of (c, n) input."""
    power = np.mean(np.square(np.atleast_2d(x)), axis=0)
    return np.sqrt(scipy.ndimage.convolve1d(power, window, mode="constant", cval=0.0))


def envelope_correction(upmixed, reference, sample_rate, block_s=ENVELOPE_SMOOTHING,
                        iterations=3):
    """Octave-band temporal envelope and diffuse-field correction.

    Channels of order two and above get a time-varying band gain that
    matches their group envelope to the reference envelope, computed
    from the four first-order channels of the original input averaged
    together. Orders zero and one get a static band equalization towards
    the reference spectral shape, preserving their overall level.

    Parameters
    ----------
    upmixed : (C, n) ndarray
        Higher-order residual to correct (not modified).
    reference : (4, m) ndarray
        First-order channels of the original impulse response.
    sample_rate : float
    block_s : float
        Gain grid hop and RMS smoothing time.
    iterations : int
        Measurement/application passes; repeated passes absorb the band
        leakage of the filter bank.

    Returns
    -------
    corrected : (C, n) ndarray
    filters : CorrectionFilters
    """
    upmixed = np.asarray(upmixed, dtype=float)
    order = ambisonics.order_from_channels(upmixed.shape[0])
    if order is None:
        raise ConfigError("corrected signal must have a square channel count")
    n = upmixed.shape[1]
    bands = _octave_bands(sample_rate)
    hop = max(int(round(block_s * sample_rate)), 1)
    centers = np.arange(hop // 2, n, hop)
    window = np.ones(max(hop | 1, 3))
    window /= window.sum()

    groups = [list(range(l * l, (l + 1) * (l + 1))) for l in range(order + 1)]
    ho_gains = np.ones((max(order - 1, 0), len(bands), centers.size))
    lo_gains = np.ones((2, len(bands)))

    reference = np.asarray(reference, dtype=float)
    ref_bands = [_band_split(reference, sos) for _, sos in bands]
    ref_env = [_rms_envelope(rb, window)[:n] for rb in ref_bands]
    ref_rms = np.array([np.sqrt(np.mean(np.square(rb))) for rb in ref_bands])
    ref_total = np.sqrt(np.mean(np.square(reference)))

    corrected = upmixed.copy()
    for _ in range(iterations):
        out = corrected.copy()

        for b, (_, sos) in enumerate(bands):
            band_sig = _band_split(corrected, sos)
            env_ref = ref_env[b]
            eps = 1e-9 * max(env_ref.max(), 1e-30)
            for l in range(2, order + 1):
                grp = groups[l]
                env = _rms_envelope(band_sig[grp], window)
                g = env_ref[centers] / (env[centers] + eps)
                g = np.clip(g, *_GAIN_LIMITS)
                ho_gains[l - 2, b] *= g
                gain_curve = np.interp(np.arange(n), centers, g)
                out[grp] += (gain_curve - 1.0) * band_sig[grp]

            for l in (0, 1):
                grp = groups[l]
                grp_rms = np.sqrt(np.mean(np.square(band_sig[grp])))
                total = np.sqrt(np.mean(np.square(corrected[grp])))
                if grp_rms <= 0 or total <= 0 or ref_total <= 0:
                    continue
                g = (ref_rms[b] / ref_total) / (grp_rms / total)
                g = float(np.clip(g, *_GAIN_LIMITS))
                lo_gains[l, b] *= g
                out[grp] += (g - 1.0) * band_sig[grp]
        corrected = out

    filters = CorrectionFilters(
        band_centers=np.array([fc for fc, _ in bands]),
        block_hop=hop,
        low_order_gains=lo_gains,
        higher_order_gains=ho_gains,
    )
    return corrected, filters
