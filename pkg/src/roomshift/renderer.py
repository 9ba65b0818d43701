# -*- coding: utf-8 -*-
"""Real-time rendering with static convolutions.

The dry input is convolved once per block with the position-invariant
directional signals of all events (a single stacked multichannel
convolver) and with the static upmixed residual. Listener movement only
changes small per-event mix matrices and delay-line read positions, so
pose updates cost no convolution work.

A control context publishes immutable pose snapshots; the audio context
picks up the latest snapshot at block boundaries, crossfades mix
matrices within one block, and slews delays a few samples per block.
"""

import threading
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import ambisonics
from . import translation as tr
from .delays import lagrange_taps
from .errors import ConfigError

#: Maximum delay-line slew rate, samples per block.
DELAY_SLEW = 8.0

#: Interpolator guard: smallest readable delay, samples.
MIN_DELAY = 2.0


@dataclass(frozen=True)
class RenderConfig:
    block_size: int = 256
    sample_rate: float = 48000.0
    order: int = 3
    crossfade: Optional[int] = None
    max_delay_s: float = 0.5

    def __post_init__(self):
        b = self.block_size
        if b < 64 or b > 4096 or b & (b - 1):
            raise ConfigError("block size must be a power of two in [64, 4096]")
        if self.crossfade is not None and not 0 < self.crossfade <= b:
            raise ConfigError("crossfade must lie in (0, block size]")
        if self.sample_rate <= 0 or self.max_delay_s <= 0:
            raise ConfigError("sample rate and delay capacity must be positive")

    @property
    def crossfade_samples(self):
        return self.block_size if self.crossfade is None else self.crossfade


@dataclass(frozen=True)
class PoseSnapshot:
    """Immutable per-pose render parameters.

    `mix[p]` maps the four directional channels of event p into the
    output channels; `delays[p]` is the event's read position in
    samples, already compensated by the direct sound's time shift.
    """

    generation: int
    pose: np.ndarray
    mix: np.ndarray
    delays: np.ndarray
    translations: tuple = field(default=(), repr=False)
    clamped: bool = False


class PartitionedConvolver:
    """Uniformly partitioned frequency-domain convolver, fixed filters.

    Partition length equals the block size; each block costs one FFT of
    the input, a multiply-accumulate over the stored partition spectra,
    and one inverse FFT per output channel.
    """

    def __init__(self, filters, block_size):
        filters = np.atleast_2d(np.asarray(filters, dtype=float))
        if filters.size == 0:
            raise ConfigError("convolver needs a nonempty filter")
        self.block_size = int(block_size)
        b = self.block_size
        n_parts = max(-(-filters.shape[1] // b), 1)
        padded = np.zeros((filters.shape[0], n_parts * b))
        padded[:, :filters.shape[1]] = filters
        parts = padded.reshape(filters.shape[0], n_parts, b).transpose(1, 0, 2)
        self.spectra = np.fft.rfft(parts, n=2 * b, axis=-1)
        self.history = np.zeros((n_parts, b + 1), dtype=complex)
        self._frame = np.zeros(2 * b)

    @property
    def n_channels(self):
        return self.spectra.shape[1]

    def reset(self):
        self.history[:] = 0.0
        self._frame[:] = 0.0

    def process(self, block):
        """Convolve one input block, returns (channels, block_size)."""
        b = self.block_size
        block = np.asarray(block, dtype=float)
        if block.shape != (b,):
            raise ConfigError("input block has the wrong length")
        self._frame[:b] = self._frame[b:]
        self._frame[b:] = block
        self.history = np.roll(self.history, 1, axis=0)
        self.history[0] = np.fft.rfft(self._frame)
        acc = np.einsum("pcf,pf->cf", self.spectra, self.history)
        return np.fft.irfft(acc, n=2 * b, axis=-1)[:, b:]


class StreamRenderer:
    """Block renderer for a fixed analysis and a movable listener.

    Thread contract: `set_pose` may be called from one control thread,
    `process_block` from one audio thread. Snapshots are exchanged by
    attribute assignment and never mutated after publication.
    """

    def __init__(self, events, residual, config=RenderConfig(),
                 limits=tr.TranslationLimits(), walls=None, clamp=True):
        if not events:
            raise ConfigError("renderer needs at least one event")
        self.config = config
        self.limits = limits
        self.events = list(events)
        self.walls = list(walls) if walls is not None else tr.build_walls(self.events)
        self.clamp = clamp
        residual = np.atleast_2d(np.asarray(residual, dtype=float))
        order = ambisonics.order_from_channels(residual.shape[0])
        if order is None or order < 1:
            raise ConfigError("residual channel count must be a square >= 4")
        if config.order != order:
            raise ConfigError("residual order does not match the render config")
        self.order = order

        b = config.block_size
        lengths = [ev.signals.shape[1] for ev in self.events]
        stacked = np.zeros((len(self.events) * 4, max(lengths)))
        for p, ev in enumerate(self.events):
            stacked[4 * p:4 * p + 4, :ev.signals.shape[1]] = ev.signals
        self._event_conv = PartitionedConvolver(stacked, b)
        self._residual_conv = PartitionedConvolver(residual, b)

        cap = int(config.max_delay_s * config.sample_rate) + 2 * b + 8
        self._cap = 1 << (cap - 1).bit_length()
        self._rings = np.zeros((len(self.events), 4, self._cap))
        self._write_pos = 0

        self._lock = threading.Lock()
        self._generation = 0
        self.delay_clamps = 0
        self._blocks_done = 0
        self._snapshot = self._make_snapshot(tr.ListenerPose((0.0, 0.0, 0.0)))
        self._applied_generation = self._snapshot.generation
        self._mix = self._snapshot.mix
        self._delays = self._snapshot.delays.astype(float)

    def _make_snapshot(self, pose, clamped=False):
        params = tr.translation_params(self.events, pose, self.limits)
        fs = self.config.sample_rate
        direct_shift = params[0].time_shift_s
        mix = np.empty((len(self.events), ambisonics.n_channels(self.order), 4))
        delays = np.empty(len(self.events))
        for p, (ev, t) in enumerate(zip(self.events, params)):
            steering = t.rotation @ ev.steering
            mix[p] = t.gain * ambisonics.sh_reencode_matrix(steering, self.order)
            delays[p] = ev.window_start + (direct_shift - t.time_shift_s) * fs
        ceiling = self._cap - self.config.block_size - 4
        clipped = np.clip(delays, MIN_DELAY, ceiling)
        self.delay_clamps += int(np.count_nonzero(clipped != delays))
        delays = clipped
        with self._lock:
            self._generation += 1
            generation = self._generation
        return PoseSnapshot(
            generation=generation,
            pose=np.array(pose.xyz if isinstance(pose, tr.ListenerPose) else pose),
            mix=mix,
            delays=delays,
            translations=tuple(params),
            clamped=clamped,
        )

    def set_pose(self, pose):
        """Clamp (if enabled), build, and publish a pose snapshot."""
        if not isinstance(pose, tr.ListenerPose):
            pose = tr.ListenerPose(tuple(np.asarray(pose, dtype=float)))
        clamped = False
        if self.clamp and self.walls:
            xyz, clamped = tr.clamp_pose(pose.xyz, self.walls)
            if clamped:
                pose = tr.ListenerPose(tuple(xyz), pose.timestamp)
        snapshot = self._make_snapshot(pose, clamped)
        self._snapshot = snapshot
        if self._blocks_done == 0:
            # Nothing streamed yet: apply without crossfade or slew.
            # Safe only before the audio context starts pulling blocks.
            self._mix = snapshot.mix
            self._delays = snapshot.delays.astype(float)
            self._applied_generation = snapshot.generation
        return snapshot

    @property
    def snapshot(self):
        return self._snapshot

    def process_block(self, block):
        """Render one block of dry input to one HOA block."""
        cfg = self.config
        b = cfg.block_size
        snap = self._snapshot
        event_streams = self._event_conv.process(block)
        residual_out = self._residual_conv.process(block)

        n_events = len(self.events)
        streams = event_streams.reshape(n_events, 4, b)
        write = self._write_pos
        idx = (write + np.arange(b)) % self._cap
        self._rings[:, :, idx] = streams
        self._write_pos = (write + b) % self._cap

        fading = snap.generation != self._applied_generation
        old_mix = self._mix
        step = np.clip(snap.delays - self._delays, -DELAY_SLEW, DELAY_SLEW)
        ramp = np.arange(1, b + 1) / b
        delay_curve = self._delays[:, None] + step[:, None] * ramp[None, :]

        positions = (write + np.arange(b))[None, :] - delay_curve
        base = np.floor(positions).astype(int)
        frac = positions - base
        taps = lagrange_taps(frac)
        delayed = np.zeros((n_events, 4, b))
        rows = np.arange(n_events)[:, None]
        for k in range(4):
            gather = self._rings[rows, :, (base + (k - 1)) % self._cap]
            delayed += taps[k][:, None, :] * gather.transpose(0, 2, 1)

        self._blocks_done += 1
        out = np.einsum("pcq,pqb->cb", snap.mix, delayed)
        if fading:
            fade = np.minimum(np.arange(1, b + 1) / cfg.crossfade_samples, 1.0)
            out_old = np.einsum("pcq,pqb->cb", old_mix, delayed)
            out = out_old + fade[None, :] * (out - out_old)
            self._mix = snap.mix
            self._applied_generation = snap.generation
        self._delays = self._delays + step
        out += residual_out
        return out

    def process(self, dry, n_out=None):
        """Stream a whole mono signal through block rendering.

        Pads the tail with zero blocks so the full response rings out;
        `n_out` overrides the output length.
        """
        dry = np.asarray(dry, dtype=float)
        if dry.ndim != 1:
            raise ConfigError("dry input must be mono")
        b = self.config.block_size
        if n_out is None:
            n_out = dry.size + self.tail_samples
        blocks = -(-n_out // b)
        out = np.zeros((ambisonics.n_channels(self.order), blocks * b))
        padded = np.zeros(blocks * b)
        count = min(dry.size, blocks * b)
        padded[:count] = dry[:count]
        for i in range(blocks):
            sl = slice(i * b, (i + 1) * b)
            out[:, sl] = self.process_block(padded[sl])
        return out[:, :n_out]

    @property
    def tail_samples(self):
        """Worst-case response length after the last input sample."""
        seg = max(int(np.ceil(d)) + ev.signals.shape[1]
                  for ev, d in zip(self.events, self._snapshot.delays))
        return max(self._residual_conv.spectra.shape[0] * self.config.block_size,
                   seg + 4)

    def reset(self):
        """Clear all streaming state, keep the published snapshot."""
        self._event_conv.reset()
        self._residual_conv.reset()
        self._rings[:] = 0.0
        self._write_pos = 0
        self._blocks_done = 0
        self._delays = self._snapshot.delays.astype(float)
        self._mix = self._snapshot.mix
        self._applied_generation = self._snapshot.generation


def preview_decode(hoa):
    """Fixed stereo audition decode from the W/Y channels.

    Opposing cardioids at azimuth +-90 degrees; for UI preview only,
    not a production decoder.
    """
    hoa = np.atleast_2d(np.asarray(hoa, dtype=float))
    if hoa.shape[0] < 4:
        raise ConfigError("preview needs first-order input")
    w = hoa[0]
    y = hoa[1] / np.sqrt(3.0)
    return 0.5 * np.stack([w + y, w - y])
