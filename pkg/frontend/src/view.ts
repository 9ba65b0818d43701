// Plan-view projection and frame assembly. The only geometry computed here
// is the world/screen mapping: markers, walls and the puck land exactly
// where the service said they are.

import { SessionInfo, Vec3, WallSummary } from "./protocol";
import { Plane, SceneState } from "./scene";

// horizontal axis, vertical axis, fixed axis
const AXES: Record<Plane, [number, number, number]> = {
  xy: [0, 1, 2],
  xz: [0, 2, 1],
  yz: [1, 2, 0],
};

export function planeAxes(plane: Plane): [number, number, number] {
  return AXES[plane];
}

export interface Viewport {
  width: number;
  height: number;
  scale: number;   // pixels per metre
  centerU: number; // world coords of the screen centre, in plane axes
  centerV: number;
}

export function fitViewport(
  session: SessionInfo | null,
  plane: Plane,
  width: number,
  height: number,
): Viewport {
  const [h, v] = AXES[plane];
  let centerU = 0;
  let centerV = 0;
  let span = 2.5;
  if (session && session.events.length) {
    // frame every event plus the recording position with ~30% margin
    const us = session.events.map((e) => e.position[h]).concat([0]);
    const vs = session.events.map((e) => e.position[v]).concat([0]);
    const uLo = Math.min(...us);
    const uHi = Math.max(...us);
    const vLo = Math.min(...vs);
    const vHi = Math.max(...vs);
    centerU = (uLo + uHi) / 2;
    centerV = (vLo + vHi) / 2;
    span = Math.max(uHi - uLo, vHi - vLo, 1) * 0.65;
  }
  const scale = Math.min(width, height) / (2 * span);
  return { width, height, scale, centerU, centerV };
}

function toScreen(vp: Viewport, wu: number, wv: number): { u: number; v: number } {
  return {
    u: vp.width / 2 + (wu - vp.centerU) * vp.scale,
    v: vp.height / 2 - (wv - vp.centerV) * vp.scale,
  };
}

export function project(vp: Viewport, plane: Plane, p: Vec3): { u: number; v: number } {
  const [h, v] = AXES[plane];
  return toScreen(vp, p[h], p[v]);
}

export function unproject(
  vp: Viewport,
  plane: Plane,
  u: number,
  v: number,
  fixed: number,
): Vec3 {
  const [h, vv, f] = AXES[plane];
  const out: Vec3 = [0, 0, 0];
  out[h] = vp.centerU + (u - vp.width / 2) / vp.scale;
  out[vv] = vp.centerV - (v - vp.height / 2) / vp.scale;
  out[f] = fixed;
  return out;
}

export interface MarkerView {
  index: number;
  world: Vec3;
  u: number;
  v: number;
  direct: boolean;
  distanceM: number;
}

export interface WallSegmentView {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface Frame {
  markers: MarkerView[];
  walls: WallSegmentView[];
  puck: { world: Vec3; u: number; v: number; clamped: boolean };
  pointer: { u: number; v: number } | null;
  readouts: { event: number; gain: number; time_shift_ms: number }[];
  banner: string | null;
  meterDb: number | null;
  buffering: boolean;
}

// A wall is a plane through `anchor` with outward `normal`; its trace on the
// current slice (fixed axis held at `slider`) is a line. Walls lying
// parallel to the slice have no trace and are skipped.
function wallSegment(
  vp: Viewport,
  plane: Plane,
  slider: number,
  wall: WallSummary,
): WallSegmentView | null {
  const [h, v, f] = AXES[plane];
  const nu = wall.normal[h];
  const nv = wall.normal[v];
  const nf = wall.normal[f];
  const inPlane = nu * nu + nv * nv;
  if (inPlane < 1e-12) return null;
  // point on the trace: anchor shifted along the in-plane normal to account
  // for the slice sitting off the anchor's fixed coordinate
  const shift = -nf * (slider - wall.anchor[f]) / inPlane;
  const pu = wall.anchor[h] + shift * nu;
  const pv = wall.anchor[v] + shift * nv;
  const len = Math.sqrt(inPlane);
  const du = -nv / len;
  const dv = nu / len;
  const reach = (vp.width + vp.height) / vp.scale;
  const a = toScreen(vp, pu - reach * du, pv - reach * dv);
  const b = toScreen(vp, pu + reach * du, pv + reach * dv);
  return { x0: a.u, y0: a.v, x1: b.u, y1: b.v };
}

export function renderFrame(state: SceneState, vp: Viewport): Frame {
  const plane = state.plane;
  const events = state.session?.events ?? [];
  const markers = events.map((e, i) => {
    const s = project(vp, plane, e.position);
    return {
      index: e.index,
      world: e.position,
      u: s.u,
      v: s.v,
      direct: i === 0,
      distanceM: e.distance_m,
    };
  });
  const walls: WallSegmentView[] = [];
  for (const w of state.session?.walls ?? []) {
    const seg = wallSegment(vp, plane, state.slider, w);
    if (seg) walls.push(seg);
  }
  const puckScreen = project(vp, plane, state.puck);
  return {
    markers,
    walls,
    puck: {
      world: state.puck,
      u: puckScreen.u,
      v: puckScreen.v,
      clamped: state.clamped,
    },
    pointer: state.pointer ? project(vp, plane, state.pointer) : null,
    readouts: state.params,
    banner: state.banner,
    meterDb: state.meterDb,
    buffering: state.buffering,
  };
}

export function paint(ctx: CanvasRenderingContext2D, vp: Viewport, frame: Frame): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  ctx.fillStyle = "#14161b";
  ctx.fillRect(0, 0, vp.width, vp.height);

  ctx.strokeStyle = "#3d4452";
  ctx.lineWidth = 1.5;
  ctx.setLineDash([6, 5]);
  for (const w of frame.walls) {
    ctx.beginPath();
    ctx.moveTo(w.x0, w.y0);
    ctx.lineTo(w.x1, w.y1);
    ctx.stroke();
  }
  ctx.setLineDash([]);

  // recording position cross
  const origin = project(vp, "xy", [0, 0, 0]);
  ctx.strokeStyle = "#566074";
  ctx.beginPath();
  ctx.moveTo(origin.u - 6, origin.v);
  ctx.lineTo(origin.u + 6, origin.v);
  ctx.moveTo(origin.u, origin.v - 6);
  ctx.lineTo(origin.u, origin.v + 6);
  ctx.stroke();

  ctx.font = "11px sans-serif";
  for (const m of frame.markers) {
    ctx.beginPath();
    ctx.arc(m.u, m.v, m.direct ? 7 : 5, 0, 2 * Math.PI);
    ctx.fillStyle = m.direct ? "#e8b339" : "#5d9cec";
    ctx.fill();
    ctx.fillStyle = "#aeb6c4";
    ctx.fillText(String(m.index), m.u + 8, m.v - 8);
  }

  if (frame.pointer) {
    ctx.strokeStyle = "#7b8496";
    ctx.beginPath();
    ctx.arc(frame.pointer.u, frame.pointer.v, 4, 0, 2 * Math.PI);
    ctx.stroke();
  }

  ctx.beginPath();
  ctx.arc(frame.puck.u, frame.puck.v, 8, 0, 2 * Math.PI);
  ctx.fillStyle = frame.puck.clamped ? "#e0564f" : "#4fce77";
  ctx.fill();
  ctx.strokeStyle = "#e9ecf2";
  ctx.lineWidth = 2;
  ctx.stroke();

  if (frame.meterDb !== null) {
    const db = Math.max(-60, Math.min(0, frame.meterDb));
    const w = ((db + 60) / 60) * (vp.width - 24);
    ctx.fillStyle = "#2a2f3a";
    ctx.fillRect(12, vp.height - 18, vp.width - 24, 8);
    ctx.fillStyle = frame.buffering ? "#8b8f99" : "#4fce77";
    ctx.fillRect(12, vp.height - 18, w, 8);
  }

  if (frame.buffering) {
    ctx.fillStyle = "#c9a13b";
    ctx.font = "12px sans-serif";
    ctx.fillText("buffering...", 12, vp.height - 26);
  }

  if (frame.banner) {
    ctx.fillStyle = "#e0564f";
    ctx.font = "13px sans-serif";
    ctx.fillText(frame.banner, 12, 20);
  }
}
