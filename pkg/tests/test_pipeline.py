# -*- coding: utf-8 -*-
import numpy as np
import pytest

from roomshift import pipeline
from roomshift.analysis import Arir
from roomshift.errors import ConfigError

FS = 48000.0


def test_config_validation():
    with pytest.raises(ConfigError):
        pipeline.AnalysisConfig(order=0)
    with pytest.raises(ConfigError):
        pipeline.AnalysisConfig(order=99)
    with pytest.raises(ConfigError):
        pipeline.AnalysisConfig(correction_iterations=0)


def test_config_dict_round_trip():
    config = pipeline.AnalysisConfig(order=2, max_events=5, cut_direct_whole=True)
    preset = pipeline.AnalysisPreset(sample_rate=FS, order=2, config=config,
                                     events=[], residual=None)
    rebuilt = pipeline.AnalysisConfig(**preset.config_dict())
    assert rebuilt == config


def test_detection_params_mirror_config():
    config = pipeline.AnalysisConfig(max_events=4, min_peak_distance_s=0.002,
                                     cut_direct_whole=True)
    params = config.detection_params()
    assert params.max_events == 4
    assert params.min_peak_distance_s == 0.002
    assert params.cut_direct_whole is True


def test_analyze_rejects_bare_arrays(small_arir):
    with pytest.raises(ConfigError):
        pipeline.analyze(small_arir.samples)


def test_analyze_produces_consistent_preset(small_arir):
    preset = pipeline.analyze(small_arir, pipeline.AnalysisConfig(order=2))
    assert preset.order == 2
    assert preset.residual.signal.shape[0] == 9
    assert preset.residual.correction is not None
    assert len(preset.events) >= 2
    assert len(preset.walls) == len(preset.events) - 1
    for ev in preset.events:
        ev.validate()
    summary = preset.summary()
    assert summary["n_events"] == len(preset.events)
    assert summary["order"] == 2
    assert len(summary["events"]) == len(preset.events)
    first = summary["events"][0]
    assert set(first) == {"index", "toa_ms", "azimuth_deg", "zenith_deg",
                          "distance_m", "position", "r_tilde"}


def test_analyze_without_correction(small_arir):
    config = pipeline.AnalysisConfig(order=2, envelope_correction=False)
    preset = pipeline.analyze(small_arir, config)
    assert preset.residual.correction is None


def test_analyze_uses_only_first_order_channels(small_arir):
    rng = np.random.default_rng(95)
    padded = np.concatenate(
        [small_arir.samples, rng.standard_normal((5, small_arir.samples.shape[1]))])
    noisy = Arir(samples=padded, sample_rate=FS)
    config = pipeline.AnalysisConfig(order=2, envelope_correction=False)
    a = pipeline.analyze(noisy, config)
    b = pipeline.analyze(small_arir, config)
    assert len(a.events) == len(b.events)
    for ea, eb in zip(a.events, b.events):
        assert np.array_equal(ea.signals, eb.signals)
    assert np.array_equal(a.residual.signal, b.residual.signal)
