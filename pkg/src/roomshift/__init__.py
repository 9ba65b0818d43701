# -*- coding: utf-8 -*-
"""Parametric 6DoF re-rendering of first-order room impulse responses.

A single measured Ambisonic room impulse response is decomposed into
localized sound events plus a diffuse residual; the events are steered,
scaled, and shifted for a translated listener and everything is
re-rendered at higher order through static convolutions.
"""

from .analysis import Arir, doa_track, pseudo_intensity, short_time_amplitude
from .errors import (ConfigError, FileFormatError, GeometryError,
                     NoDirectSoundError, PresetError, RoomshiftError,
                     TrajectoryError, UnsupportedInputError)
from .events import DetectionParams, SoundEvent, analyze_events, detect_events
from .io import load_preset, read_arir, read_trajectory, save_preset, write_hoa
from .pipeline import AnalysisConfig, AnalysisPreset, analyze
from .renderer import (PartitionedConvolver, PoseSnapshot, RenderConfig,
                       StreamRenderer, preview_decode)
from .translation import (EventTranslation, ListenerPose, TranslationLimits,
                          Wall, adapt_residual, assemble, build_walls,
                          clamp_pose, translate_segment, translation_params)
from .upmix import (CorrectionFilters, UpmixedResidual, envelope_correction,
                    upmix_residual, upmix_segment)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "AnalysisPreset", "Arir", "ConfigError",
    "CorrectionFilters", "DetectionParams", "EventTranslation",
    "FileFormatError", "GeometryError", "ListenerPose", "NoDirectSoundError",
    "PartitionedConvolver", "PoseSnapshot", "PresetError", "RenderConfig",
    "RoomshiftError", "SoundEvent", "StreamRenderer", "TrajectoryError",
    "TranslationLimits", "UnsupportedInputError", "UpmixedResidual", "Wall",
    "adapt_residual", "analyze", "analyze_events", "assemble", "build_walls",
    "clamp_pose", "detect_events", "doa_track", "envelope_correction",
    "load_preset", "preview_decode", "pseudo_intensity", "read_arir",
    "read_trajectory", "save_preset", "short_time_amplitude",
    "translate_segment", "translation_params", "upmix_residual",
    "upmix_segment", "write_hoa",
]
