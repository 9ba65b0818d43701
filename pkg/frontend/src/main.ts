// Browser entry point: wires the DOM to the pure scene state, the pose
// channel and the preview player. Everything here is plumbing; the logic
// lives in the imported modules where the tests can reach it.

import { createSession, fetchSession, poseUrl, Vec3 } from "./protocol";
import * as scene from "./scene";
import { AudioSink, PreviewPlayer } from "./preview";
import { PoseChannel, SocketLike } from "./poseChannel";
import { fitViewport, paint, renderFrame, unproject } from "./view";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("plan");
const baseInput = el<HTMLInputElement>("base");
const sessionInput = el<HTMLInputElement>("session-id");
const fileInput = el<HTMLInputElement>("arir-file");
const connectBtn = el<HTMLButtonElement>("connect");
const planeSelect = el<HTMLSelectElement>("plane");
const slider = el<HTMLInputElement>("slider");
const sliderLabel = el<HTMLElement>("slider-label");
const sourceSelect = el<HTMLSelectElement>("source");
const playBtn = el<HTMLButtonElement>("play");
const stopBtn = el<HTMLButtonElement>("stop");
const statusLine = el<HTMLElement>("status");
const readoutBody = el<HTMLElement>("readouts");

let state = scene.initialState();
let channel: PoseChannel | null = null;
let player: PreviewPlayer | null = null;
let dragging = false;

function dispatch(next: scene.SceneState): void {
  state = next;
}

// Web Audio sink: queue each chunk right behind the previous one, nudging
// forward if the clock overran the queue (wire stall).
class WebAudioSink implements AudioSink {
  private ctx: AudioContext | null = null;
  private at = 0;
  private fs = 48000;
  private channels = 2;

  start(sampleRate: number, channels: number): void {
    this.ctx = new AudioContext();
    this.fs = sampleRate;
    this.channels = channels;
    this.at = this.ctx.currentTime + 0.15;
  }

  push(samples: Float32Array): void {
    const ctx = this.ctx;
    if (!ctx) return;
    const frames = Math.floor(samples.length / this.channels);
    if (!frames) return;
    const buffer = ctx.createBuffer(this.channels, frames, this.fs);
    for (let ch = 0; ch < this.channels; ch++) {
      const dest = buffer.getChannelData(ch);
      for (let i = 0; i < frames; i++) dest[i] = samples[i * this.channels + ch];
    }
    const node = ctx.createBufferSource();
    node.buffer = buffer;
    node.connect(ctx.destination);
    if (this.at < ctx.currentTime) this.at = ctx.currentTime + 0.03;
    node.start(this.at);
    this.at += frames / this.fs;
  }

  stop(): void {
    this.ctx?.close();
    this.ctx = null;
  }
}

function connect(): void {
  const base = baseInput.value.replace(/\/+$/, "");
  dispatch(scene.connecting(state));

  const load = sessionInput.value.trim()
    ? fetchSession(base, sessionInput.value.trim())
    : (() => {
        const file = fileInput.files?.[0];
        if (!file) return Promise.reject(new Error("pick a session id or a file"));
        return createSession(base, file);
      })();

  load
    .then((info) => {
      dispatch(scene.sessionLoaded(state, info));
      sessionInput.value = info.session;
      statusLine.textContent =
        `session ${info.session}: ${info.n_events} events, ` +
        `order ${info.order}, ${info.sample_rate} Hz`;
      openChannel(base, info.session);
      player?.stop();
      player = new PreviewPlayer(base, new WebAudioSink(), {
        onMeter: (db) => dispatch(scene.meterChanged(state, db)),
        onBuffering: (on) => dispatch(scene.bufferingChanged(state, on)),
        onEnded: () => dispatch(scene.playbackChanged(state, false)),
        onError: (msg) => dispatch(scene.connectionLost(state, msg)),
      });
    })
    .catch((err) => {
      dispatch(scene.connectionLost(state, `service unreachable: ${err.message ?? err}`));
    });
}

function openChannel(base: string, session: string): void {
  channel?.stop();
  channel = new PoseChannel(
    poseUrl(base, session),
    (url) => new WebSocket(url) as unknown as SocketLike,
    {
      onAck: (ack) => dispatch(scene.poseAcked(state, ack)),
      onServiceError: (msg) => dispatch({ ...state, banner: msg }),
      onOpen: () => dispatch(scene.channelOpen(state)),
      onDown: (reason) => dispatch(scene.connectionLost(state, reason)),
    },
  );
  channel.start();
}

function pointerPose(ev: PointerEvent): Vec3 {
  const rect = canvas.getBoundingClientRect();
  const vp = fitViewport(state.session, state.plane, canvas.width, canvas.height);
  const u = ((ev.clientX - rect.left) / rect.width) * canvas.width;
  const v = ((ev.clientY - rect.top) / rect.height) * canvas.height;
  return unproject(vp, state.plane, u, v, state.slider);
}

function steerTo(ev: PointerEvent): void {
  if (!state.session || !channel) return;
  const pose = pointerPose(ev);
  dispatch(scene.pointerTarget(state, pose));
  channel.setTarget(pose);
}

canvas.addEventListener("pointerdown", (ev) => {
  if (ev.button !== 0) return;
  dragging = true;
  canvas.setPointerCapture(ev.pointerId);
  steerTo(ev);
});
canvas.addEventListener("pointermove", (ev) => {
  if (dragging) steerTo(ev);
});
canvas.addEventListener("pointerup", (ev) => {
  dragging = false;
  canvas.releasePointerCapture(ev.pointerId);
  dispatch(scene.pointerTarget(state, null));
});

connectBtn.addEventListener("click", connect);
planeSelect.addEventListener("change", () => {
  dispatch(scene.planeChanged(state, planeSelect.value as scene.Plane));
});
slider.addEventListener("input", () => {
  dispatch(scene.sliderChanged(state, Number(slider.value)));
  sliderLabel.textContent = `${Number(slider.value).toFixed(2)} m`;
});
sourceSelect.addEventListener("change", () => {
  dispatch(scene.sourceChanged(state, sourceSelect.value));
  if (state.playing && player && state.session) {
    player.start(state.session.session, state.source);
  }
});
playBtn.addEventListener("click", () => {
  if (!player || !state.session) return;
  dispatch(scene.playbackChanged(state, true));
  player.start(state.session.session, state.source);
});
stopBtn.addEventListener("click", () => {
  player?.stop();
  dispatch(scene.playbackChanged(state, false));
});

function renderReadouts(): void {
  const rows = state.params
    .map(
      (p) =>
        `<tr><td>${p.event}</td><td>${p.gain.toFixed(2)}</td>` +
        `<td>${p.time_shift_ms.toFixed(2)}</td></tr>`,
    )
    .join("");
  if (readoutBody.innerHTML !== rows) readoutBody.innerHTML = rows;
}

function tick(): void {
  const width = canvas.clientWidth || 720;
  const height = canvas.clientHeight || 540;
  if (canvas.width !== width) canvas.width = width;
  if (canvas.height !== height) canvas.height = height;
  const vp = fitViewport(state.session, state.plane, canvas.width, canvas.height);
  const frame = renderFrame(state, vp);
  const ctx = canvas.getContext("2d");
  if (ctx) paint(ctx, vp, frame);
  renderReadouts();
  requestAnimationFrame(tick);
}

requestAnimationFrame(tick);
