# -*- coding: utf-8 -*-
"""Human-readable summaries, CSV export, and report figures."""

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import analysis

EVENT_COLUMNS = ("index", "toa_ms", "azimuth_deg", "zenith_deg",
                 "distance_m", "r_tilde")


def events_table(summary):
    """Fixed-width text table of the analysis summary."""
    lines = ["  n   TOA ms   azimuth    zenith   dist m   r~"]
    for ev in summary["events"]:
        lines.append("%3d %8.2f %8.1f° %8.1f° %7.2f  %5.3f" % (
            ev["index"], ev["toa_ms"], ev["azimuth_deg"],
            ev["zenith_deg"], ev["distance_m"], ev["r_tilde"]))
    return "\n".join(lines)


def write_events_csv(summary, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_COLUMNS)
        for ev in summary["events"]:
            writer.writerow([ev[col] for col in EVENT_COLUMNS])


def envelope_figure(arir, preset, path):
    """Short-time amplitude with event TOA markers, saved as an image."""
    envelope = analysis.short_time_amplitude(arir)
    t = 1e3 * np.arange(envelope.size) / arir.sample_rate
    fig, ax = plt.subplots(figsize=(8, 4))
    floor = max(envelope.max() * 1e-6, 1e-12)
    ax.plot(t, 20 * np.log10(np.maximum(envelope, floor)), lw=0.8)
    for ev in preset.events:
        ax.axvline(1e3 * ev.toa_s, color="tab:red", lw=0.8, alpha=0.7)
    ax.set_xlabel("time / ms")
    ax.set_ylabel("short-time amplitude / dB")
    ax.set_xlim(0, min(t[-1], 1e3 * (preset.events[-1].toa_s + 0.05) if preset.events else t[-1]))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def floorplan_figure(preset, path):
    """Top-down view: event positions, walls, recording position."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(0, 0, "k^", markersize=10, label="recording position")
    for ev in preset.events:
        x, y = ev.position[0], ev.position[1]
        marker = "o" if ev.index == 1 else "s"
        ax.plot(x, y, marker, color="tab:blue")
        ax.annotate(str(ev.index), (x, y), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)
    for wall in preset.walls:
        # Draw the wall line through its anchor, perpendicular to the
        # inward normal, in the xy plane.
        n = np.asarray(wall.normal, dtype=float)[:2]
        a = np.asarray(wall.anchor, dtype=float)[:2]
        norm = np.linalg.norm(n)
        if norm <= 0:
            continue
        tangent = np.array([-n[1], n[0]]) / norm
        span = 1.5 * max(np.linalg.norm(ev.position) for ev in preset.events)
        p0, p1 = a - span * tangent, a + span * tangent
        ax.plot([p0[0], p1[0]], [p0[1], p1[1]], "r-", lw=1, alpha=0.6)
    ax.set_xlabel("x / m")
    ax.set_ylabel("y / m")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(arir, preset, report_dir):
    """CSV plus figures in one directory; returns the written paths."""
    os.makedirs(report_dir, exist_ok=True)
    paths = {
        "events_csv": os.path.join(report_dir, "events.csv"),
        "envelope_png": os.path.join(report_dir, "envelope.png"),
        "floorplan_png": os.path.join(report_dir, "floorplan.png"),
    }
    write_events_csv(preset.summary(), paths["events_csv"])
    envelope_figure(arir, preset, paths["envelope_png"])
    floorplan_figure(preset, paths["floorplan_png"])
    return paths
