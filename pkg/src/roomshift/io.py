# -*- coding: utf-8 -*-
"""File formats: multichannel WAV, analysis presets, trajectories.

Audio lives in 32-bit float WAV. Spherical-harmonic metadata travels in
a JSON sidecar next to the audio file (`<name>.wav.json`); untagged
files are assumed ambiX (ACN/SN3D) and converted, since internal
processing is always ACN/N3D. Presets are a versioned JSON envelope
with base64 blobs for signals and a checksum over the payload.
"""

import base64
import csv
import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np
import scipy.io.wavfile

from . import ambisonics
from .analysis import Arir
from .errors import FileFormatError, PresetError, TrajectoryError
from .events import SoundEvent
from .translation import Wall
from .upmix import CorrectionFilters, UpmixedResidual

PRESET_FORMAT = "roomshift-preset"
PRESET_VERSION = 1

TRAJECTORY_HEADER = ("time_s", "x_m", "y_m", "z_m")


def _sidecar_path(path):
    return str(path) + ".json"


def _normalization_factors(n_channels, target):
    """Per-channel gains converting `target` normalization to N3D."""
    order = ambisonics.order_from_channels(n_channels)
    if order is None:
        raise FileFormatError("channel count %d is not a square" % n_channels)
    degrees = np.concatenate([[l] * (2 * l + 1) for l in range(order + 1)])
    if target == "sn3d":
        return np.sqrt(2.0 * degrees + 1.0)
    if target == "n3d":
        return np.ones(n_channels)
    raise FileFormatError("unknown normalization %r" % (target,))


def read_audio(path):
    """Float WAV reader; returns (samples (channels, n), sample_rate)."""
    try:
        rate, data = scipy.io.wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise FileFormatError("not a readable WAV file: %s" % exc)
    if data.dtype not in (np.float32, np.float64):
        raise FileFormatError("only float WAV files are supported, got %s" % data.dtype)
    if data.ndim == 1:
        data = data[:, None]
    return np.asarray(data, dtype=float).T, float(rate)


def read_arir(path, normalization=None):
    """Load an ARIR file as ACN/N3D.

    The sidecar (or the `normalization` override: "n3d"/"sn3d") decides
    the input convention; without either, ambiX (SN3D) is assumed.
    """
    try:
        rate, data = scipy.io.wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise FileFormatError("not a readable WAV file: %s" % exc)
    if data.dtype not in (np.float32, np.float64):
        raise FileFormatError("only float WAV files are supported, got %s" % data.dtype)
    if data.ndim == 1:
        data = data[:, None]
    samples = np.asarray(data, dtype=float).T

    meta = {}
    sidecar = _sidecar_path(path)
    if os.path.exists(sidecar):
        try:
            with open(sidecar) as fh:
                meta = json.load(fh)
        except (OSError, ValueError) as exc:
            raise FileFormatError("unreadable sidecar %s: %s" % (sidecar, exc))
        if meta.get("ordering", "acn") != "acn":
            raise FileFormatError("only ACN channel ordering is supported")

    norm = normalization or meta.get("normalization", "sn3d")
    factors = _normalization_factors(samples.shape[0], norm)
    if norm != "n3d":
        samples = samples * factors[:, None]
    return Arir(samples=samples, sample_rate=float(rate))


def write_hoa(path, samples, sample_rate, normalization="n3d"):
    """Write an ACN-ordered HOA signal as float32 WAV plus sidecar."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    factors = _normalization_factors(samples.shape[0], normalization)
    if normalization != "n3d":
        samples = samples / factors[:, None]
    scipy.io.wavfile.write(path, int(round(sample_rate)),
                           samples.T.astype(np.float32))
    order = ambisonics.order_from_channels(samples.shape[0])
    with open(_sidecar_path(path), "w") as fh:
        json.dump({"normalization": normalization, "ordering": "acn",
                   "order": order}, fh)
        fh.write("\n")


def _encode_array(arr):
    arr = np.asarray(arr, dtype=float)
    return {
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.astype("<f8").tobytes()).decode("ascii"),
    }


def _decode_array(blob):
    try:
        raw = base64.b64decode(blob["data"].encode("ascii"), validate=True)
        arr = np.frombuffer(raw, dtype="<f8").astype(float)
        return arr.reshape(blob["shape"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PresetError("corrupt array blob: %s" % exc)


def _canonical(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


def _event_payload(event):
    return {
        "index": event.index,
        "toa_s": event.toa_s,
        "doa": list(map(float, event.doa)),
        "position": list(map(float, event.position)),
        "r_tilde": event.r_tilde,
        "exclusion": list(map(float, event.exclusion)),
        "window_start": event.window_start,
        "flat_start": event.flat_start,
        "flat_end": event.flat_end,
        "taper": event.taper,
        "sample_rate": event.sample_rate,
        "steering": _encode_array(event.steering),
        "signals": _encode_array(event.signals),
    }


def _event_from_payload(data, sample_rate):
    try:
        event = SoundEvent(
            index=int(data["index"]),
            toa_s=float(data["toa_s"]),
            doa=np.array(data["doa"], dtype=float),
            position=np.array(data["position"], dtype=float),
            steering=_decode_array(data["steering"]),
            exclusion=np.array(data["exclusion"], dtype=float),
            r_tilde=float(data["r_tilde"]),
            window_start=int(data["window_start"]),
            flat_start=int(data["flat_start"]),
            flat_end=int(data["flat_end"]),
            taper=int(data["taper"]),
            signals=_decode_array(data["signals"]),
            sample_rate=float(data.get("sample_rate", sample_rate)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise PresetError("malformed event entry: %s" % exc)
    event.validate()
    return event


def save_preset(preset, path):
    """Serialize an AnalysisPreset; see load_preset for the inverse."""
    correction = None
    if preset.residual.correction is not None:
        c = preset.residual.correction
        correction = {
            "band_centers": list(map(float, c.band_centers)),
            "block_hop": int(c.block_hop),
            "low_order_gains": _encode_array(c.low_order_gains),
            "higher_order_gains": _encode_array(c.higher_order_gains),
        }
    payload = {
        "sample_rate": preset.sample_rate,
        "order": preset.order,
        "config": preset.config_dict(),
        "events": [_event_payload(ev) for ev in preset.events],
        "residual": _encode_array(preset.residual.signal),
        "correction": correction,
        "walls": [{"anchor": list(map(float, w.anchor)),
                   "normal": list(map(float, w.normal))} for w in preset.walls],
    }
    document = {
        "format": PRESET_FORMAT,
        "version": PRESET_VERSION,
        "checksum": hashlib.sha256(_canonical(payload)).hexdigest(),
        "payload": payload,
    }
    with open(path, "w") as fh:
        json.dump(document, fh)
        fh.write("\n")


def load_preset(path):
    """Parse, checksum, and validate a preset file."""
    from .pipeline import AnalysisConfig, AnalysisPreset

    try:
        with open(path) as fh:
            document = json.load(fh)
    except FileNotFoundError:
        raise
    except (OSError, ValueError) as exc:
        raise PresetError("unreadable preset: %s" % exc)
    if document.get("format") != PRESET_FORMAT:
        raise PresetError("not a preset file")
    if document.get("version") != PRESET_VERSION:
        raise PresetError("unsupported preset version %r" % document.get("version"))
    payload = document.get("payload")
    if not isinstance(payload, dict):
        raise PresetError("preset payload missing")
    if hashlib.sha256(_canonical(payload)).hexdigest() != document.get("checksum"):
        raise PresetError("checksum mismatch, file corrupted")

    try:
        sample_rate = float(payload["sample_rate"])
        order = int(payload["order"])
        config = AnalysisConfig(**payload.get("config", {}))
        events = [_event_from_payload(e, sample_rate) for e in payload["events"]]
        correction = None
        if payload.get("correction") is not None:
            c = payload["correction"]
            correction = CorrectionFilters(
                band_centers=np.array(c["band_centers"], dtype=float),
                block_hop=int(c["block_hop"]),
                low_order_gains=_decode_array(c["low_order_gains"]),
                higher_order_gains=_decode_array(c["higher_order_gains"]),
            )
        residual = UpmixedResidual(
            signal=_decode_array(payload["residual"]),
            sample_rate=sample_rate,
            correction=correction,
        )
        walls = [Wall(anchor=np.array(w["anchor"], dtype=float),
                      normal=np.array(w["normal"], dtype=float))
                 for w in payload["walls"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise PresetError("malformed preset payload: %s" % exc)

    return AnalysisPreset(sample_rate=sample_rate, order=order, config=config,
                          events=events, residual=residual, walls=walls)


@dataclass
class Trajectory:
    """Timed listener path; poses interpolate linearly between rows."""

    times: np.ndarray
    positions: np.ndarray

    def pose_at(self, t):
        """Position at time t, clamped to the first/last row outside."""
        return np.array([np.interp(t, self.times, self.positions[:, k])
                         for k in range(3)])

    @property
    def duration(self):
        return float(self.times[-1])


def read_trajectory(path):
    """Parse a `time_s,x_m,y_m,z_m` CSV with strictly increasing time."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise TrajectoryError("unreadable trajectory: %s" % exc)
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise TrajectoryError("trajectory file is empty")
    header = tuple(cell.strip() for cell in rows[0])
    if header != TRAJECTORY_HEADER:
        raise TrajectoryError("expected header %s" % ",".join(TRAJECTORY_HEADER))
    if len(rows) < 2:
        raise TrajectoryError("trajectory has no data rows")

    try:
        table = np.array([[float(cell) for cell in row] for row in rows[1:]])
    except ValueError as exc:
        raise TrajectoryError("non-numeric trajectory row: %s" % exc)
    if table.shape[1] != 4 or not np.all(np.isfinite(table)):
        raise TrajectoryError("trajectory rows must be four finite columns")
    times = table[:, 0]
    if np.any(np.diff(times) <= 0):
        raise TrajectoryError("trajectory times must be strictly increasing")
    return Trajectory(times=times, positions=table[:, 1:])
