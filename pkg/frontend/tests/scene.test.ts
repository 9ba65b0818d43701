import { describe, expect, it } from "vitest";

import { PoseAck, SessionInfo, Vec3 } from "../src/protocol";
import * as scene from "../src/scene";
import {
  fitViewport,
  planeAxes,
  project,
  renderFrame,
  unproject,
} from "../src/view";
import { demoScene } from "./mockService";

function loaded(info: SessionInfo = demoScene()): scene.SceneState {
  return scene.sessionLoaded(scene.initialState(), info);
}

function ack(partial: Partial<PoseAck> = {}): PoseAck {
  return {
    applied: [0.5, 0.1, 0],
    clamped: false,
    generation: 0,
    params: [{ event: 0, gain: 1.2, time_shift_ms: -0.4 }],
    ...partial,
  };
}

describe("scene state", () => {
  it("starts idle with the puck at the recording position", () => {
    const s = scene.initialState();
    expect(s.connection).toBe("idle");
    expect(s.puck).toEqual([0, 0, 0]);
    expect(s.session).toBeNull();
  });

  it("loads a session and clears the connecting banner", () => {
    const s = loaded();
    expect(s.connection).toBe("open");
    expect(s.banner).toBeNull();
    expect(s.session?.events).toHaveLength(3);
  });

  it("moves the puck only on an ack, never on pointer input", () => {
    let s = loaded();
    s = scene.pointerTarget(s, [1.5, 1.5, 0]);
    expect(s.puck).toEqual([0, 0, 0]);
    expect(s.pointer).toEqual([1.5, 1.5, 0]);
    s = scene.poseAcked(s, ack({ applied: [0.5, 0.1, 0] }));
    expect(s.puck).toEqual([0.5, 0.1, 0]);
  });

  it("mirrors ack params and clamp flag verbatim", () => {
    const a = ack({ clamped: true, params: [{ event: 2, gain: 4, time_shift_ms: 1.1 }] });
    const s = scene.poseAcked(loaded(), a);
    expect(s.clamped).toBe(true);
    expect(s.params).toBe(a.params);
  });

  it("drops stale acks that arrive out of order", () => {
    let s = scene.poseAcked(loaded(), ack({ generation: 5, applied: [1, 0, 0] }));
    s = scene.poseAcked(s, ack({ generation: 3, applied: [9, 9, 9] }));
    expect(s.puck).toEqual([1, 0, 0]);
    expect(s.generation).toBe(5);
  });

  it("keeps a banner after losing the connection", () => {
    const s = scene.connectionLost(loaded(), "connection lost, retrying...");
    expect(s.connection).toBe("lost");
    expect(s.banner).toContain("lost");
  });

  it("clears the meter when playback stops", () => {
    let s = scene.meterChanged(scene.playbackChanged(loaded(), true), -12);
    expect(s.meterDb).toBe(-12);
    s = scene.playbackChanged(s, false);
    expect(s.meterDb).toBeNull();
    expect(s.buffering).toBe(false);
  });
});

describe("frame rendering", () => {
  const vp = fitViewport(demoScene(), "xy", 720, 540);

  it("draws one marker per event and one segment per wall", () => {
    const frame = renderFrame(loaded(), vp);
    expect(frame.markers).toHaveLength(3);
    expect(frame.walls).toHaveLength(2);
    expect(frame.markers[0].direct).toBe(true);
    expect(frame.markers[1].direct).toBe(false);
  });

  it("places markers exactly at the service-provided positions", () => {
    const info = demoScene();
    const frame = renderFrame(loaded(info), vp);
    frame.markers.forEach((m, i) => {
      expect(m.world).toEqual(info.events[i].position);
    });
  });

  it("draws no walls for a single-event session", () => {
    const info = demoScene();
    const solo: SessionInfo = {
      ...info,
      events: info.events.slice(0, 1),
      n_events: 1,
      walls: [],
    };
    const frame = renderFrame(loaded(solo), fitViewport(solo, "xy", 720, 540));
    expect(frame.markers).toHaveLength(1);
    expect(frame.walls).toHaveLength(0);
  });

  it("renders without a session and without crashing", () => {
    const s = scene.connectionLost(scene.connecting(scene.initialState()), "service unreachable");
    const frame = renderFrame(s, fitViewport(null, "xy", 720, 540));
    expect(frame.markers).toHaveLength(0);
    expect(frame.banner).toContain("unreachable");
  });

  it("is a pure function of the state", () => {
    const s = scene.poseAcked(loaded(), ack());
    const a = renderFrame(s, vp);
    const b = renderFrame(s, vp);
    expect(a).toEqual(b);
  });

  it("shows readouts straight from the last ack", () => {
    const a = ack({ params: [{ event: 1, gain: 2.5, time_shift_ms: 3.25 }] });
    const frame = renderFrame(scene.poseAcked(loaded(), a), vp);
    expect(frame.readouts).toEqual(a.params);
  });
});

describe("projection", () => {
  const info = demoScene();

  it("round-trips world coordinates through the screen on every plane", () => {
    for (const plane of ["xy", "xz", "yz"] as const) {
      const vp = fitViewport(info, plane, 640, 480);
      const p: Vec3 = [0.8, -0.45, 0.3];
      const [, , f] = planeAxes(plane);
      const s = project(vp, plane, p);
      const back = unproject(vp, plane, s.u, s.v, p[f]);
      for (let i = 0; i < 3; i++) expect(back[i]).toBeCloseTo(p[i], 9);
    }
  });

  it("flips the vertical axis so +v points up on screen", () => {
    const vp = fitViewport(info, "xy", 640, 480);
    const low = project(vp, "xy", [0, -1, 0]);
    const high = project(vp, "xy", [0, 1, 0]);
    expect(high.v).toBeLessThan(low.v);
  });

  it("keeps wall traces perpendicular to the wall normal", () => {
    const vp = fitViewport(info, "xy", 720, 540);
    const frame = renderFrame(loaded(info), vp);
    frame.walls.forEach((seg, i) => {
      // back-project the segment into the plane and dot with the normal
      const a = unproject(vp, "xy", seg.x0, seg.y0, 0);
      const b = unproject(vp, "xy", seg.x1, seg.y1, 0);
      const d: Vec3 = [b[0] - a[0], b[1] - a[1], 0];
      const n = info.walls[i].normal;
      const cos = (d[0] * n[0] + d[1] * n[1]) / (Math.hypot(d[0], d[1]) * Math.hypot(n[0], n[1]));
      expect(Math.abs(cos)).toBeLessThan(1e-9);
    });
  });

  it("passes the wall trace through the anchor when the slice contains it", () => {
    const vp = fitViewport(info, "xy", 720, 540);
    const s = scene.sliderChanged(loaded(info), info.walls[0].anchor[2]);
    const frame = renderFrame(s, vp);
    const seg = frame.walls[0];
    const anchor = project(vp, "xy", info.walls[0].anchor);
    // distance from the anchor to the segment's line, in pixels
    const dx = seg.x1 - seg.x0;
    const dy = seg.y1 - seg.y0;
    const cross = (anchor.u - seg.x0) * dy - (anchor.v - seg.y0) * dx;
    expect(Math.abs(cross) / Math.hypot(dx, dy)).toBeLessThan(1e-6);
  });
});
