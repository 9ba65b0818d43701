# -*- coding: utf-8 -*-
"""Sound-event detection, localization, segmentation and residual extraction.

The short-time amplitude envelope is searched for the most prominent
peaks within 100 ms of the direct sound. Each peak becomes a sound
event: a tapered window around its time of arrival is beamformed into
four tetrahedrally steered directional signals, softly excluding the
three off-DOA beams when the aligned beam alone already captures the
event. Subtracting the first-order reconstructions of all events from
the input yields a gap-less first-order residual.
"""

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import ambisonics, analysis
from .errors import NoDirectSoundError, PresetError

#: Duration of the median window used by the exclusion factor, seconds.
EXCLUSION_MEDIAN_TIME = 0.010


@dataclass
class DetectionParams:
    """Tunables of the peak picker and segmenter."""

    max_events: int = 10
    search_window_s: float = 0.100
    min_peak_distance_s: float = 0.001
    decay_offset_db: float = -3.0
    decay_tau_s: float = 0.002
    speed_of_sound: float = 343.0
    max_segment_s: float = 0.005
    taper_s: float = 0.0005
    relevant_peak_db: float = -12.0
    min_direct_flat_s: float = 0.001
    cut_direct_whole: bool = False

    def __post_init__(self):
        if self.max_events < 1:
            raise ValueError("max_events must be >= 1")
        if self.min_peak_distance_s <= 0:
            raise ValueError("min_peak_distance_s must be positive")


@dataclass
class SoundEvent:
    """One localized direct-sound or early-reflection segment.

    ``signals`` holds the four directional signals after exclusion
    weighting; sample k of that buffer corresponds to input sample
    ``window_start + k``. ``flat_start`` is the peak (TOA) sample.
    """

    index: int
    toa_s: float
    doa: np.ndarray
    position: np.ndarray
    steering: np.ndarray
    exclusion: np.ndarray
    r_tilde: float
    window_start: int
    flat_start: int
    flat_end: int
    taper: int
    signals: np.ndarray
    sample_rate: float

    def validate(self):
        """Raise PresetError when any structural invariant is broken."""
        r = np.asarray(self.exclusion, dtype=float)
        if r.shape != (4,) or r[0] != 1.0 or np.any(r < 0.0) or np.any(r > 1.0):
            raise PresetError(f"event {self.index}: invalid exclusion vector {r}")
        if abs(np.linalg.norm(self.doa) - 1.0) > 1e-6:
            raise PresetError(f"event {self.index}: DOA is not unit length")
        steering = np.asarray(self.steering, dtype=float)
        if steering.shape != (3, 4):
            raise PresetError(f"event {self.index}: bad steering shape {steering.shape}")
        if np.max(np.abs(steering[:, 0] - self.doa)) > 1e-6:
            raise PresetError(f"event {self.index}: steering is not aligned with the DOA")
        gram = steering.T @ steering
        if np.max(np.abs(gram - (4.0 / 3.0) * np.eye(4) + 1.0 / 3.0)) > 1e-6:
            raise PresetError(f"event {self.index}: steering is not tetrahedral")
        if self.signals.ndim != 2 or self.signals.shape[0] != 4:
            raise PresetError(f"event {self.index}: directional signals must be 4 x n")
        if not (self.window_start <= self.flat_start <= self.flat_end):
            raise PresetError(f"event {self.index}: inconsistent window bounds")
        if self.toa_s < 0:
            raise PresetError(f"event {self.index}: negative time of arrival")

    @property
    def toa_index(self):
        return self.flat_start

    @property
    def distance(self):
        return float(np.linalg.norm(self.position))


def localize_event(toa_s, doa, speed_of_sound=343.0):
    """Position of a sound event, ``c * T * doa`` (recording point at origin)."""
    return speed_of_sound * toa_s * np.asarray(doa, dtype=float)


def detect_events(envelope, doa_directions, sample_rate, params=None):
    """Pick the most prominent envelope peaks with robustness criteria.

    The global envelope maximum is the direct sound; further peaks are
    accepted greedily in descending amplitude within the search window,
    subject to a minimum peak distance and to exponential decay
    threshold curves anchored at every earlier accepted peak, which
    suppress post-oscillations of high-level peaks.

    Parameters
    ----------
    envelope : (n,) ndarray
        Short-time amplitude envelope.
    doa_directions : (n, 3) ndarray
        Per-sample DOA track.
    sample_rate : float
    params : DetectionParams, optional

    Returns
    -------
    peaks : list of (toa_index, doa)
        Sorted by time of arrival; first entry is the direct sound.
    """
    params = params or DetectionParams()
    envelope = np.asarray(envelope, dtype=float)
    if envelope.size == 0 or not np.any(envelope > 0.0):
        raise NoDirectSoundError("envelope is empty or all zero")

    t_direct = int(np.argmax(envelope))
    win = int(round(params.search_window_s * sample_rate))
    min_dist = int(round(params.min_peak_distance_s * sample_rate))
    offset = 10.0 ** (params.decay_offset_db / 20.0)
    tau = params.decay_tau_s * sample_rate

    hi = min(t_direct + win + 1, envelope.size)
    candidates, _ = scipy.signal.find_peaks(envelope[t_direct + 1 : hi])
    candidates += t_direct + 1
    order = candidates[np.argsort(envelope[candidates])[::-1]]

    accepted = [t_direct]
    for t in order:
        if len(accepted) >= params.max_events:
            break
        amp = envelope[t]
        ok = True
        for t_acc in accepted:
            if abs(t - t_acc) < min_dist:
                ok = False
                break
            if t_acc < t and amp <= envelope[t_acc] * offset * np.exp(-(t - t_acc) / tau):
                ok = False
                break
        if ok:
            accepted.append(t)

    accepted.sort()
    return [(int(t), doa_directions[t].copy()) for t in accepted]


def segment_window(flat_start, flat_end, taper, n_total):
    """Tapered extraction window clipped to the signal bounds.

    The window rises from 0 at ``flat_start - taper`` with a raised
    cosine, is 1 over [flat_start, flat_end] and falls back to 0 at
    ``flat_end + taper``.

    Returns
    -------
    start : int
        First signal sample covered by the returned weights.
    weights : (m,) ndarray
    """
    lo = flat_start - taper
    hi = flat_end + taper
    k = np.arange(lo, hi + 1)
    w = np.ones(k.size)
    rise = k < flat_start
    w[rise] = 0.5 - 0.5 * np.cos(np.pi * (k[rise] - lo) / taper)
    fall = k > flat_end
    w[fall] = 0.5 - 0.5 * np.cos(np.pi * (hi - k[fall]) / taper)
    keep = (k >= 0) & (k < n_total)
    return int(k[keep][0]), w[keep]


def extract_segment(samples, flat_start, flat_end, taper):
    """Windowed copy of `samples` around an event.

    Returns ``(window_start, segment)`` where `segment` is the
    elementwise product of the window with the corresponding slice.
    """
    start, w = segment_window(flat_start, flat_end, taper, samples.shape[1])
    return start, samples[:, start : start + w.size] * w


def segment_flat_end(beam, flat_start, next_flat_start, sample_rate, params, is_direct):
    """End of the flat window region for one event.

    Limited by the next detected event (0.5 ms early), by the next
    relevant peak of the aligned beam signal, and by the maximum
    segment length, whichever comes first.

    Parameters
    ----------
    beam : (n,) ndarray
        Aligned beamformer output over the whole impulse response.
    flat_start : int
        Event TOA sample.
    next_flat_start : int or None
        TOA sample of the following event.
    """
    taper = odd_taper(params.taper_s, sample_rate)
    end = flat_start + int(round(params.max_segment_s * sample_rate))
    if next_flat_start is not None:
        end = min(end, next_flat_start - taper)

    lo = flat_start + taper
    hi = min(flat_start + int(round(params.max_segment_s * sample_rate)), beam.size - 1)
    if hi > lo:
        mag = np.abs(beam[lo : hi + 1])
        peaks, _ = scipy.signal.find_peaks(mag)
        ref = np.abs(beam[flat_start : lo + 1]).max()
        relevant = peaks[mag[peaks] > ref * 10.0 ** (params.relevant_peak_db / 20.0)]
        if relevant.size:
            end = min(end, int(relevant[0]) + lo - taper)

    if is_direct:
        end = max(end, flat_start + int(round(params.min_direct_flat_s * sample_rate)))
    end = max(end, flat_start + 1)
    return int(min(end, beam.size - 1))


def odd_taper(taper_s, sample_rate):
    """Taper slope length in samples (at least 1)."""
    return max(int(round(taper_s * sample_rate)), 1)


def exclusion_factor(envelope, sample_rate, toa_index, candidate_residual, peak_local):
    """Soft exclusion weights for the three off-DOA beams.

    Compares the 10 ms median of the input envelope around the event
    peak against the envelope of the single-beam residual segment at
    the peak. A large ratio means the aligned beam extracted the event
    cleanly and the off-DOA beams can stay in the residual; a small
    ratio keeps them in the segment.

    Returns
    -------
    r : (4,) ndarray
        ``[1, max(1 - ratio, 0) * ones(3)]``.
    ratio : float
        The median-to-residual ratio (inf for a vanishing residual).
    """
    half = int(round(EXCLUSION_MEDIAN_TIME * sample_rate / 2.0))
    lo = max(toa_index - half, 0)
    hi = min(toa_index + half + 1, envelope.size)
    numerator = float(np.median(envelope[lo:hi]))

    res_env = analysis.short_time_amplitude(
        analysis.Arir(candidate_residual, sample_rate)
    )
    peak_local = min(max(peak_local, 0), res_env.size - 1)
    denominator = float(res_env[peak_local])

    if denominator <= 0.0:
        ratio = np.inf
    else:
        ratio = numerator / denominator
    keep = max(1.0 - ratio, 0.0) if np.isfinite(ratio) else 0.0
    return np.array([1.0, keep, keep, keep]), ratio


def directional_signals(segment, steering, exclusion):
    """Tetrahedrally beamformed directional signals of one segment.

    ``pi * diag(r) * Y1(steering)^T * segment`` for a first-order
    segment; the first row is steered at the event DOA.
    """
    y1 = ambisonics.sh_reencode_matrix(steering, 1)
    return np.pi * (np.asarray(exclusion)[:, None] * (y1.T @ segment[:4]))


def first_order_reconstruction(event):
    """First-order image of an event's directional signals, shape (4, n)."""
    y1 = ambisonics.sh_reencode_matrix(event.steering, 1)
    return y1 @ event.signals


def residual_first_order(samples, events):
    """First-order residual after removing all event reconstructions.

    Subtraction at the stored window positions keeps the identity
    ``input = sum of reconstructions + residual`` exact by construction.
    """
    residual = samples[:4].copy()
    for event in events:
        recon = first_order_reconstruction(event)
        residual[:, event.window_start : event.window_start + recon.shape[1]] -= recon
    return residual


def analyze_events(arir, envelope, doa_directions, params=None):
    """Detect, localize and extract all sound events of an ARIR.

    Returns
    -------
    events : list of SoundEvent
    residual : (4, n) ndarray
        First-order residual impulse response.
    """
    params = params or DetectionParams()
    fs = arir.sample_rate
    peaks = detect_events(envelope, doa_directions, fs, params)
    taper = odd_taper(params.taper_s, fs)

    events = []
    for i, (toa_index, doa) in enumerate(peaks):
        beam = np.pi * (ambisonics.real_sh(1, doa) @ arir.samples[:4])
        next_start = peaks[i + 1][0] if i + 1 < len(peaks) else None
        flat_end = segment_flat_end(beam, toa_index, next_start, fs, params, is_direct=i == 0)
        window_start, segment = extract_segment(arir.samples[:4], toa_index, flat_end, taper)

        single = np.pi * (ambisonics.real_sh(1, doa) @ segment)
        candidate = segment - np.outer(ambisonics.real_sh(1, doa), single)
        r, r_tilde = exclusion_factor(envelope, fs, toa_index, candidate, toa_index - window_start)
        if i == 0 and params.cut_direct_whole:
            r = np.ones(4)
            r_tilde = 0.0

        steering = ambisonics.steer_tetrahedron(doa)
        toa_s = toa_index / fs
        events.append(
            SoundEvent(
                index=i + 1,
                toa_s=toa_s,
                doa=doa,
                position=localize_event(toa_s, doa, params.speed_of_sound),
                steering=steering,
                exclusion=r,
                r_tilde=float(r_tilde) if np.isfinite(r_tilde) else float("inf"),
                window_start=window_start,
                flat_start=toa_index,
                flat_end=flat_end,
                taper=taper,
                signals=directional_signals(segment, steering, r),
                sample_rate=fs,
            )
        )

    return events, residual_first_order(arir.samples, events)
