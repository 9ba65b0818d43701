# -*- coding: utf-8 -*-
"""Listener translation of localized sound events.

Moving the listener from the recording position to x̃ turns every
localized event into a rotated, gain-scaled, and time-shifted copy of
its directional signals. The residual is shifted along with the direct
sound but otherwise untouched. Walls derived from the event geometry
bound the movement space so reflections never overtake the direct
sound.
"""

import warnings
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import ambisonics
from .delays import fractional_shift
from .errors import GeometryError

_DEGENERATE_DISTANCE = 1e-9


@dataclass(frozen=True)
class ListenerPose:
    """Translated listener position in meters, recording position at 0."""

    position: Tuple[float, float, float]
    timestamp: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise GeometryError("pose must be a finite 3-vector")
        object.__setattr__(self, "position", (float(p[0]), float(p[1]), float(p[2])))

    @property
    def xyz(self):
        return np.array(self.position)

    @property
    def is_null(self):
        return self.position == (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TranslationLimits:
    """Soft-knee limits for gain and event ordering.

    Gains pass unchanged up to `knee_ratio * max_gain` and saturate
    below `max_gain`. Arrival times of reflections approach the direct
    arrival asymptotically over a `floor_knee_s` wide knee instead of
    crossing it.
    """

    max_gain: float = 4.0
    knee_ratio: float = 0.8
    floor_knee_s: float = 0.25e-3
    speed_of_sound: float = 343.0

    def __post_init__(self):
        if self.max_gain <= 0:
            raise GeometryError("max_gain must be positive")
        if not 0.0 < self.knee_ratio < 1.0:
            raise GeometryError("knee_ratio must lie in (0, 1)")
        if self.floor_knee_s <= 0:
            raise GeometryError("floor_knee_s must be positive")


@dataclass(frozen=True)
class EventTranslation:
    """Per-event pose parameters.

    `time_shift_s` is positive when the event arrives earlier than in
    the recording; `arrival_s = toa_s - time_shift_s` is the limited
    arrival time at the translated position.
    """

    gain: float
    time_shift_s: float
    arrival_s: float
    rotation: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class Wall:
    """Half-space boundary: allowed poses satisfy (x - anchor) . normal >= 0."""

    anchor: np.ndarray
    normal: np.ndarray


def limit_gain(gain, limits):
    """Soft-knee gain limiter: identity below the knee, saturates at max_gain."""
    knee = limits.knee_ratio * limits.max_gain
    if gain <= knee:
        return float(gain)
    span = limits.max_gain - knee
    return float(knee + span * np.tanh((gain - knee) / span))


def _soft_floor(arrival, floor, knee_s):
    """Keep `arrival` above `floor`, approached asymptotically.

    Identity for arrival >= floor + knee_s; below that the result stays
    strictly above `floor`, matching value and slope at the knee.
    """
    u = (arrival - floor) / knee_s
    if u >= 1.0:
        return float(arrival)
    bend = 1.0 + (2.0 / np.pi) * np.arctan((np.pi / 2.0) * (u - 1.0))
    return float(floor + knee_s * bend)


def _rotation_between(doa, direction):
    """Rotation mapping the recorded DOA onto the shifted direction."""
    az0, ze0 = ambisonics.cart_to_sph(doa)
    az1, ze1 = ambisonics.cart_to_sph(direction)
    return (ambisonics.rotation_z(az1)
            @ ambisonics.rotation_y(ze1 - ze0)
            @ ambisonics.rotation_z(-az0))


def translation_params(events, pose, limits=TranslationLimits()):
    """Rotation, gain, and limited time shift for every event at a pose.

    Events must be in ascending order of arrival with the direct sound
    first; the direct arrival is the floor for all later events.

    Returns a list of EventTranslation, one per event.
    """
    if not events:
        return []
    if isinstance(pose, ListenerPose):
        x = pose.xyz
    else:
        x = ListenerPose(tuple(np.asarray(pose, dtype=float))).xyz

    if np.all(x == 0.0):
        return [EventTranslation(1.0, 0.0, float(ev.toa_s), np.eye(3), np.array(ev.doa))
                for ev in events]

    raw = []
    for ev in events:
        src = np.asarray(ev.position, dtype=float)
        dist = np.linalg.norm(src)
        if ev.toa_s <= 0.0 or dist <= _DEGENERATE_DISTANCE:
            raise GeometryError("event at the recording position has no geometry")
        shifted = src - x
        shifted_dist = np.linalg.norm(shifted)
        if shifted_dist <= _DEGENERATE_DISTANCE:
            # Co-located listener: direction is undefined, keep the
            # recorded one; the gain knee absorbs the 1/0 singularity.
            direction = np.array(ev.doa)
            shifted_dist = _DEGENERATE_DISTANCE
        else:
            direction = shifted / shifted_dist
        gain = limit_gain(dist / shifted_dist, limits)
        shift = (dist - shifted_dist) / limits.speed_of_sound
        raw.append((gain, shift, direction))

    out = []
    direct_arrival = events[0].toa_s - raw[0][1]
    for i, (ev, (gain, shift, direction)) in enumerate(zip(events, raw)):
        arrival = ev.toa_s - shift
        if i > 0:
            arrival = _soft_floor(arrival, direct_arrival, limits.floor_knee_s)
        if np.array_equal(direction, np.asarray(ev.doa)):
            rotation = np.eye(3)
        else:
            rotation = _rotation_between(np.asarray(ev.doa), direction)
        out.append(EventTranslation(
            gain=gain,
            time_shift_s=float(ev.toa_s - arrival),
            arrival_s=float(arrival),
            rotation=rotation,
            direction=np.asarray(direction),
        ))
    return out


def translate_segment(event, translation, order):
    """Gain-scaled re-encoding of an event at its rotated steering.

    Returns the ((order+1)**2, n) segment; the time shift is applied
    separately when assembling or streaming.
    """
    steering = translation.rotation @ event.steering
    encode = ambisonics.sh_reencode_matrix(steering, order)
    return translation.gain * (encode @ event.signals)


def adapt_residual(residual, direct_shift_s, sample_rate):
    """Advance the residual by the direct sound's time shift.

    Output has the same length; content moved past either end is lost.
    """
    residual = np.asarray(residual, dtype=float)
    return fractional_shift(residual, -direct_shift_s * sample_rate,
                            n_out=residual.shape[-1])


def assemble(events, translations, residual, sample_rate, order=None,
             compensate_direct=False):
    """Sum translated events and the shifted residual into one response.

    With `compensate_direct` the whole output is delayed by the direct
    sound's time shift, so the direct arrival stays put and the
    residual needs no shift at all. This is the time base the streaming
    renderer uses.

    Parameters
    ----------
    events : sequence of SoundEvent
    translations : sequence of EventTranslation
    residual : (C, n) ndarray
        Already upmixed residual, defines the output order if `order`
        is None.
    sample_rate : float
    order : int, optional
    compensate_direct : bool

    Returns
    -------
    assembled : (C, m) ndarray
    """
    residual = np.asarray(residual, dtype=float)
    if order is None:
        order = ambisonics.order_from_channels(residual.shape[0])
    if len(events) != len(translations):
        raise GeometryError("one translation per event required")

    direct_shift = translations[0].time_shift_s if translations else 0.0
    offset = direct_shift if compensate_direct else 0.0

    placed = []
    n_out = residual.shape[1]
    for ev, tr in zip(events, translations):
        seg = translate_segment(ev, tr, order)
        delay_s = ev.window_start / sample_rate - tr.time_shift_s + offset
        delay = delay_s * sample_rate
        placed.append((seg, delay))
        n_out = max(n_out, int(np.ceil(delay)) + seg.shape[1] + 2)

    out = np.zeros((ambisonics.n_channels(order), n_out))
    res_delay = 0.0 if compensate_direct else -direct_shift * sample_rate
    out[:, :] += fractional_shift(residual, res_delay, n_out=n_out)
    for seg, delay in placed:
        out += fractional_shift(seg, delay, n_out=n_out)
    return out


def build_walls(events):
    """Perpendicular-bisector walls between the direct and each reflection.

    The inward normal points from each reflection's position toward the
    direct sound's; poses on the direct side of every wall keep the
    arrival order intact.
    """
    if len(events) < 2:
        return []
    direct = np.asarray(events[0].position, dtype=float)
    walls = []
    for ev in events[1:]:
        src = np.asarray(ev.position, dtype=float)
        normal = 0.5 * (direct - src)
        if np.linalg.norm(normal) <= _DEGENERATE_DISTANCE:
            continue
        walls.append(Wall(anchor=src + normal, normal=normal))
    return walls


def clamp_pose(position, walls, max_iterations=200):
    """Project a pose into the wall-bounded movement space.

    Cyclic projection onto the violated half-spaces; the feasible set
    always contains the recording position, so the projection
    converges. A final sweep removes sign errors from rounding.

    Returns (clamped position, clamped flag).
    """
    x = np.asarray(position, dtype=float).copy()
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise GeometryError("pose must be a finite 3-vector")
    if not walls:
        return x, False

    clamped = False
    for _ in range(max_iterations):
        moved = False
        for wall in walls:
            d = np.dot(x - wall.anchor, wall.normal)
            if d < 0.0:
                x = x - (d / np.dot(wall.normal, wall.normal)) * wall.normal
                moved = True
                clamped = True
        if not moved:
            break

    for _ in range(8):
        worst = min(np.dot(x - w.anchor, w.normal) for w in walls)
        if worst >= 0.0:
            return x, clamped
        for wall in walls:
            d = np.dot(x - wall.anchor, wall.normal)
            if d < 0.0:
                nn = np.dot(wall.normal, wall.normal)
                x = x - ((d - 1e-12 * nn) / nn) * wall.normal

    warnings.warn("pose clamp did not converge, holding the recording position")
    return np.zeros(3), True
