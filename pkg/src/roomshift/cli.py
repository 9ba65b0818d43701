# -*- coding: utf-8 -*-
"""Command line entry points."""

import functools
import os
import time

import click
import numpy as np
import scipy.signal

from . import io, pipeline, renderer, reporting, translation
from .errors import (ConfigError, FileFormatError, GeometryError,
                     NoDirectSoundError, PresetError, RoomshiftError,
                     TrajectoryError, UnsupportedInputError)

_EXIT_CODES = (
    (ConfigError, 2),
    (FileFormatError, 3),
    (NoDirectSoundError, 4),
    (UnsupportedInputError, 4),
    (PresetError, 5),
    (TrajectoryError, 6),
    (GeometryError, 7),
)


def _exit_code(exc):
    for klass, code in _EXIT_CODES:
        if isinstance(exc, klass):
            return code
    return 1


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except RoomshiftError as exc:
            click.echo("error: %s" % exc, err=True)
            raise SystemExit(_exit_code(exc))
    return wrapper


@click.group()
def cli():
    """Parametric 6DoF re-rendering of Ambisonic room impulse responses."""


@cli.command()
@click.argument("arir_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("preset_path", type=click.Path(dir_okay=False, writable=True))
@click.option("--events", "-P", "max_events", default=10, show_default=True,
              help="Maximum number of detected sound events.")
@click.option("--order", "-N", default=3, show_default=True,
              help="Ambisonic output order.")
@click.option("--min-peak-dist", default=1.0, show_default=True,
              help="Minimum event spacing in milliseconds.")
@click.option("--max-seg-ms", default=5.0, show_default=True,
              help="Maximum flat segment length in milliseconds.")
@click.option("--no-envelope-correction", is_flag=True,
              help="Skip the octave-band residual correction.")
@click.option("--cut-direct-whole", is_flag=True,
              help="Remove the direct segment in all directions.")
@click.option("--normalization", type=click.Choice(["auto", "n3d", "sn3d"]),
              default="auto", show_default=True,
              help="Input normalization; auto reads the sidecar.")
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Write events.csv and report figures here.")
@handle_errors
def analyze(arir_path, preset_path, max_events, order, min_peak_dist,
            max_seg_ms, no_envelope_correction, cut_direct_whole,
            normalization, report_dir):
    """Analyze an ARIR file into a renderable preset."""
    arir = io.read_arir(arir_path,
                        None if normalization == "auto" else normalization)
    config = pipeline.AnalysisConfig(
        order=order,
        max_events=max_events,
        min_peak_distance_s=1e-3 * min_peak_dist,
        max_segment_s=1e-3 * max_seg_ms,
        envelope_correction=not no_envelope_correction,
        cut_direct_whole=cut_direct_whole,
    )
    preset = pipeline.analyze(arir, config)
    io.save_preset(preset, preset_path)
    summary = preset.summary()
    click.echo("%d events, order %d, %.0f Hz"
               % (summary["n_events"], preset.order, preset.sample_rate))
    click.echo(reporting.events_table(summary))
    click.echo("preset written to %s" % preset_path)
    if report_dir:
        paths = reporting.write_report(arir, preset, report_dir)
        for name in sorted(paths.values()):
            click.echo("report: %s" % name)


def _load_dry(path, expected_rate):
    samples, rate = io.read_audio(path)
    if rate != expected_rate:
        raise ConfigError("dry input at %.0f Hz, preset expects %.0f Hz"
                          % (rate, expected_rate))
    if samples.shape[0] > 1:
        click.echo("note: using channel 1 of %d" % samples.shape[0], err=True)
    return samples[0]


def _parse_pose(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError("pose must be x,y,z in meters")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError("pose must be numeric: %r" % text)


@cli.command()
@click.argument("preset_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("dry_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False, writable=True))
@click.option("--trajectory", type=click.Path(exists=True, dir_okay=False),
              default=None, help="CSV listener path (time_s,x_m,y_m,z_m).")
@click.option("--pose", default="0,0,0", show_default=True,
              help="Static pose when no trajectory is given.")
@click.option("--block", default=256, show_default=True)
@click.option("--no-walls", is_flag=True, help="Disable pose clamping.")
@click.option("--max-gain", default=4.0, show_default=True)
@click.option("--normalization", type=click.Choice(["n3d", "sn3d"]),
              default="n3d", show_default=True)
@handle_errors
def render(preset_path, dry_path, out_path, trajectory, pose, block,
           no_walls, max_gain, normalization):
    """Render dry audio through a preset along a listener path."""
    preset = io.load_preset(preset_path)
    dry = _load_dry(dry_path, preset.sample_rate)
    limits = translation.TranslationLimits(max_gain=max_gain)
    config = renderer.RenderConfig(block_size=block,
                                   sample_rate=preset.sample_rate,
                                   order=preset.order)
    stream = renderer.StreamRenderer(preset.events, preset.residual.signal,
                                     config, limits, preset.walls,
                                     clamp=not no_walls)
    fs = preset.sample_rate
    if trajectory is None:
        stream.set_pose(_parse_pose(pose))
        out = stream.process(dry)
    else:
        path = io.read_trajectory(trajectory)
        n_out = dry.size + stream.tail_samples
        blocks = -(-n_out // block)
        out = np.empty((stream.snapshot.mix.shape[1], blocks * block))
        padded = np.zeros(blocks * block)
        padded[:dry.size] = dry
        for i in range(blocks):
            stream.set_pose(path.pose_at(i * block / fs))
            out[:, i * block:(i + 1) * block] = stream.process_block(
                padded[i * block:(i + 1) * block])
        out = out[:, :n_out]
    io.write_hoa(out_path, out, fs, normalization)
    click.echo("rendered %.2f s at order %d to %s"
               % (out.shape[1] / fs, preset.order, out_path))


@cli.command()
@click.argument("preset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--report-dir", type=click.Path(file_okay=False), default=None)
@handle_errors
def walls(preset_path, report_dir):
    """Print the movement-space walls of a preset."""
    preset = io.load_preset(preset_path)
    if not preset.walls:
        click.echo("no walls (fewer than two events)")
    for i, wall in enumerate(preset.walls):
        click.echo("wall %d: anchor [%7.3f %7.3f %7.3f] m, "
                   "inward normal [%7.3f %7.3f %7.3f]"
                   % ((i + 1,) + tuple(wall.anchor) + tuple(wall.normal)))
    if report_dir:
        os.makedirs(report_dir, exist_ok=True)
        out = os.path.join(report_dir, "floorplan.png")
        reporting.floorplan_figure(preset, out)
        click.echo("report: %s" % out)


def run_bench(preset, seconds, block, pose_every=8, seed=1234):
    """Measure real-time factors of split-static vs naive rendering.

    Both paths process the same dry noise and the same pose schedule.
    The naive baseline rebuilds the full translated response on every
    pose change and convolves the running block with it.
    """
    if seconds <= 0:
        raise ConfigError("bench needs a positive duration")
    fs = preset.sample_rate
    n_blocks = max(int(seconds * fs) // block, 1)
    rng = np.random.default_rng(seed)
    dry = rng.standard_normal(n_blocks * block)
    reach = 0.25 * preset.events[0].distance
    angles = np.linspace(0.0, 2.0 * np.pi, n_blocks, endpoint=False)
    poses = reach * np.stack([np.cos(angles), np.sin(angles),
                              np.zeros(n_blocks)], axis=1)

    limits = translation.TranslationLimits()
    config = renderer.RenderConfig(block_size=block, sample_rate=fs,
                                   order=preset.order)
    stream = renderer.StreamRenderer(preset.events, preset.residual.signal,
                                     config, limits, preset.walls)
    start = time.perf_counter()
    for i in range(n_blocks):
        if i % pose_every == 0:
            stream.set_pose(poses[i])
        stream.process_block(dry[i * block:(i + 1) * block])
    split_time = time.perf_counter() - start

    assembled = None
    out = None
    start = time.perf_counter()
    for i in range(n_blocks):
        if i % pose_every == 0 or assembled is None:
            xyz, _ = translation.clamp_pose(poses[i], preset.walls)
            params = translation.translation_params(preset.events, xyz, limits)
            assembled = translation.assemble(
                preset.events, params, preset.residual.signal, fs,
                compensate_direct=True)
            if out is None:
                out = np.zeros((assembled.shape[0],
                                n_blocks * block + assembled.shape[1]))
        chunk = scipy.signal.fftconvolve(
            assembled, dry[None, i * block:(i + 1) * block], axes=-1)
        end = min(i * block + chunk.shape[1], out.shape[1])
        out[:, i * block:end] += chunk[:, :end - i * block]
    naive_time = time.perf_counter() - start

    duration = n_blocks * block / fs
    return {
        "duration_s": duration,
        "split_rtf": split_time / duration,
        "naive_rtf": naive_time / duration,
        "speedup": naive_time / split_time if split_time > 0 else float("inf"),
    }


@cli.command()
@click.argument("preset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seconds", default=2.0, show_default=True)
@click.option("--block", default=256, show_default=True)
@click.option("--report-dir", type=click.Path(file_okay=False), default=None)
@handle_errors
def bench(preset_path, seconds, block, report_dir):
    """Compare split-static rendering against naive reconvolution."""
    preset = io.load_preset(preset_path)
    result = run_bench(preset, seconds, block)
    click.echo("%.2f s workload, block %d" % (result["duration_s"], block))
    click.echo("split-static RTF: %.4f" % result["split_rtf"])
    click.echo("naive-dynamic RTF: %.4f" % result["naive_rtf"])
    click.echo("speedup: %.1fx" % result["speedup"])
    if report_dir:
        os.makedirs(report_dir, exist_ok=True)
        csv_path = os.path.join(report_dir, "bench.csv")
        with open(csv_path, "w") as fh:
            fh.write("mode,rtf\nsplit_static,%.6f\nnaive_dynamic,%.6f\n"
                     % (result["split_rtf"], result["naive_rtf"]))
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(4, 3))
        ax.bar(["split static", "naive dynamic"],
               [result["split_rtf"], result["naive_rtf"]])
        ax.set_ylabel("real-time factor")
        fig.tight_layout()
        png_path = os.path.join(report_dir, "bench.png")
        fig.savefig(png_path, dpi=120)
        plt.close(fig)
        click.echo("report: %s" % csv_path)
        click.echo("report: %s" % png_path)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@handle_errors
def serve(host, port):
    """Start the local control service for the companion UI."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port, log_level="info")


main = cli

if __name__ == "__main__":
    main()
