# -*- coding: utf-8 -*-
"""Offline analysis pipeline: ARIR in, renderable preset out."""

from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from . import ambisonics, analysis, events as events_mod, translation, upmix
from .errors import ConfigError


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs of the offline stage; defaults follow the CLI defaults."""

    order: int = 3
    max_events: int = 10
    search_window_s: float = 0.100
    min_peak_distance_s: float = 0.001
    max_segment_s: float = 0.005
    taper_s: float = 0.0005
    speed_of_sound: float = 343.0
    decay_offset_db: float = -3.0
    decay_tau_s: float = 0.002
    relevant_peak_db: float = -12.0
    min_direct_flat_s: float = 0.001
    cut_direct_whole: bool = False
    envelope_correction: bool = True
    correction_iterations: int = 3

    def __post_init__(self):
        if not 1 <= self.order <= ambisonics.MAX_ORDER:
            raise ConfigError("order must lie in [1, %d]" % ambisonics.MAX_ORDER)
        if self.correction_iterations < 1:
            raise ConfigError("correction_iterations must be >= 1")

    def detection_params(self):
        return events_mod.DetectionParams(
            max_events=self.max_events,
            search_window_s=self.search_window_s,
            min_peak_distance_s=self.min_peak_distance_s,
            decay_offset_db=self.decay_offset_db,
            decay_tau_s=self.decay_tau_s,
            speed_of_sound=self.speed_of_sound,
            max_segment_s=self.max_segment_s,
            taper_s=self.taper_s,
            relevant_peak_db=self.relevant_peak_db,
            min_direct_flat_s=self.min_direct_flat_s,
            cut_direct_whole=self.cut_direct_whole,
        )


@dataclass
class AnalysisPreset:
    """Everything the renderer needs, self-contained and serializable."""

    sample_rate: float
    order: int
    config: AnalysisConfig
    events: List[events_mod.SoundEvent]
    residual: upmix.UpmixedResidual
    walls: List[translation.Wall] = field(default_factory=list)

    def config_dict(self):
        return asdict(self.config)

    def summary(self):
        """Structured overview for the CLI table and the service."""
        evs = []
        for ev in self.events:
            azimuth, zenith = ambisonics.cart_to_sph(np.asarray(ev.doa))
            evs.append({
                "index": ev.index,
                "toa_ms": 1e3 * ev.toa_s,
                "azimuth_deg": float(np.degrees(azimuth)),
                "zenith_deg": float(np.degrees(zenith)),
                "distance_m": ev.distance,
                "position": [float(v) for v in ev.position],
                "r_tilde": ev.r_tilde,
            })
        return {
            "sample_rate": self.sample_rate,
            "order": self.order,
            "n_events": len(self.events),
            "events": evs,
            "walls": [{"anchor": [float(v) for v in w.anchor],
                       "normal": [float(v) for v in w.normal]}
                      for w in self.walls],
        }


def analyze(arir, config=AnalysisConfig()):
    """Full offline stage: detect, localize, segment, upmix, correct.

    Only the first-order channels of the input are analyzed; the
    returned preset carries the events, the corrected higher-order
    residual, and the movement-space walls.
    """
    if isinstance(arir, np.ndarray):
        raise ConfigError("analyze expects an Arir, not a bare array")
    first_order = arir
    if arir.order > 1:
        first_order = analysis.Arir(samples=arir.samples[:4],
                                    sample_rate=arir.sample_rate)

    params = config.detection_params()
    doa_directions = analysis.doa_track(first_order)
    envelope = analysis.short_time_amplitude(first_order)
    events, residual_fo = events_mod.analyze_events(
        first_order, envelope, doa_directions, params)

    upmixed = upmix.upmix_residual(residual_fo, doa_directions, config.order)
    correction = None
    if config.envelope_correction:
        upmixed, correction = upmix.envelope_correction(
            upmixed, first_order.samples, arir.sample_rate,
            iterations=config.correction_iterations)
    residual = upmix.UpmixedResidual(signal=upmixed,
                                     sample_rate=arir.sample_rate,
                                     correction=correction)
    walls = translation.build_walls(events)
    return AnalysisPreset(
        sample_rate=arir.sample_rate,
        order=config.order,
        config=config,
        events=events,
        residual=residual,
        walls=walls,
    )
