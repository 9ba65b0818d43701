// UI state. Every transition is a pure function of the previous state plus
// one server message or one input event, so the whole surface can be driven
// and inspected headlessly. The puck only ever moves on a server ack: the
// raw pointer is kept separately as a ghost target.

import { EventParams, PoseAck, SessionInfo, Vec3 } from "./protocol";

export type Plane = "xy" | "xz" | "yz";

export type Connection = "idle" | "connecting" | "open" | "lost";

export interface SceneState {
  connection: Connection;
  banner: string | null;
  session: SessionInfo | null;
  plane: Plane;
  slider: number;
  puck: Vec3;
  pointer: Vec3 | null;
  clamped: boolean;
  generation: number;
  params: EventParams[];
  playing: boolean;
  buffering: boolean;
  meterDb: number | null;
  source: string;
}

export function initialState(): SceneState {
  return {
    connection: "idle",
    banner: null,
    session: null,
    plane: "xy",
    slider: 0,
    puck: [0, 0, 0],
    pointer: null,
    clamped: false,
    generation: -1,
    params: [],
    playing: false,
    buffering: false,
    meterDb: null,
    source: "speech",
  };
}

export function connecting(s: SceneState): SceneState {
  return { ...s, connection: "connecting", banner: "connecting..." };
}

export function sessionLoaded(s: SceneState, info: SessionInfo): SceneState {
  const puck: Vec3 = info.pose ? [...info.pose] : [0, 0, 0];
  return {
    ...s,
    connection: "open",
    banner: null,
    session: info,
    puck,
    pointer: null,
    clamped: false,
    generation: -1,
    params: [],
  };
}

export function connectionLost(s: SceneState, why: string): SceneState {
  return { ...s, connection: "lost", banner: why };
}

export function channelOpen(s: SceneState): SceneState {
  return { ...s, connection: "open", banner: null };
}

export function poseAcked(s: SceneState, ack: PoseAck): SceneState {
  // acks are totally ordered per session; drop anything stale that
  // straggles in around a reconnect
  if (ack.generation <= s.generation) return s;
  return {
    ...s,
    puck: ack.applied,
    clamped: ack.clamped,
    generation: ack.generation,
    params: ack.params,
  };
}

export function pointerTarget(s: SceneState, target: Vec3 | null): SceneState {
  return { ...s, pointer: target };
}

export function planeChanged(s: SceneState, plane: Plane): SceneState {
  return { ...s, plane, pointer: null };
}

export function sliderChanged(s: SceneState, value: number): SceneState {
  return { ...s, slider: value };
}

export function sourceChanged(s: SceneState, source: string): SceneState {
  return { ...s, source };
}

export function playbackChanged(s: SceneState, playing: boolean): SceneState {
  return playing
    ? { ...s, playing }
    : { ...s, playing, buffering: false, meterDb: null };
}

export function meterChanged(s: SceneState, db: number | null): SceneState {
  return { ...s, meterDb: db };
}

export function bufferingChanged(s: SceneState, on: boolean): SceneState {
  return { ...s, buffering: on };
}
