// Stand-in for the control service: same endpoints, same message shapes,
// canned analysis geometry. Pose clamping runs the same half-space rule the
// engine uses, so a drag across a wall gets the same echoes a live session
// would produce.

import { createServer, IncomingMessage, Server, ServerResponse } from "node:http";
import { WebSocket, WebSocketServer } from "ws";
import { SessionInfo, Vec3, WallSummary } from "../src/protocol";

export const MOCK_SESSION = "mock0001";

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function dist(a: Vec3, b: Vec3): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

// walls sit halfway between the direct sound and each reflection, facing
// the direct side, exactly like the session geometry the service publishes
function bisectorWalls(events: { position: Vec3 }[]): WallSummary[] {
  const s0 = events[0].position;
  return events.slice(1).map((e) => {
    const sk = e.position;
    return {
      anchor: [
        (s0[0] + sk[0]) / 2,
        (s0[1] + sk[1]) / 2,
        (s0[2] + sk[2]) / 2,
      ] as Vec3,
      normal: sub(s0, sk),
    };
  });
}

export function demoScene(): SessionInfo {
  const events = [
    {
      index: 0,
      toa_ms: 5.83,
      azimuth_deg: 0.0,
      zenith_deg: 90.0,
      distance_m: 2.0,
      position: [2, 0, 0] as Vec3,
      r_tilde: 0.12,
    },
    {
      index: 1,
      toa_ms: 9.14,
      azimuth_deg: 118.0,
      zenith_deg: 90.0,
      distance_m: 3.1,
      position: [-1.46, 2.74, 0] as Vec3,
      r_tilde: 0.4,
    },
    {
      index: 2,
      toa_ms: 11.9,
      azimuth_deg: -95.0,
      zenith_deg: 72.0,
      distance_m: 4.16,
      position: [-0.35, -3.97, 1.2] as Vec3,
      r_tilde: Infinity,
    },
  ];
  return {
    session: MOCK_SESSION,
    sample_rate: 48000,
    order: 3,
    n_events: events.length,
    events,
    walls: bisectorWalls(events),
  };
}

export function wallMargin(pose: Vec3, walls: WallSummary[]): number {
  let worst = Infinity;
  for (const w of walls) {
    worst = Math.min(worst, dot(sub(pose, w.anchor), w.normal));
  }
  return worst;
}

export function clampPose(
  pose: Vec3,
  walls: WallSummary[],
): { pose: Vec3; clamped: boolean } {
  const x: Vec3 = [...pose];
  let moved = false;
  for (let pass = 0; pass < 64; pass++) {
    let dirty = false;
    for (const w of walls) {
      const d = dot(sub(x, w.anchor), w.normal);
      if (d < 0) {
        const nn = dot(w.normal, w.normal);
        // slight overshoot so the projected point is strictly feasible
        const step = (d / nn) * (1 + 1e-9);
        x[0] -= step * w.normal[0];
        x[1] -= step * w.normal[1];
        x[2] -= step * w.normal[2];
        dirty = true;
        moved = true;
      }
    }
    if (!dirty) break;
  }
  return { pose: x, clamped: moved };
}

// mirror the python side: json.dumps writes bare Infinity tokens
function serviceJson(value: unknown): string {
  return JSON.stringify(value, (_k, v) =>
    v === Infinity ? "__inf__" : v === -Infinity ? "__-inf__" : v,
  )
    .replace(/"__inf__"/g, "Infinity")
    .replace(/"__-inf__"/g, "-Infinity");
}

export function wavHeader(nSamples: number, channels: number, sampleRate: number): Buffer {
  const data = nSamples * channels * 4;
  const buf = Buffer.alloc(44);
  buf.write("RIFF", 0);
  buf.writeUInt32LE(36 + data, 4);
  buf.write("WAVE", 8);
  buf.write("fmt ", 12);
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(3, 20);
  buf.writeUInt16LE(channels, 22);
  buf.writeUInt32LE(sampleRate, 24);
  buf.writeUInt32LE(sampleRate * channels * 4, 28);
  buf.writeUInt16LE(channels * 4, 32);
  buf.writeUInt16LE(32, 34);
  buf.write("data", 36);
  buf.writeUInt32LE(data, 40);
  return buf;
}

export interface MockService {
  url: string;
  scene: SessionInfo;
  acked: number;
  pose: Vec3;
  kickClients(): void;
  close(): Promise<void>;
}

export async function startMockService(): Promise<MockService> {
  const scene = demoScene();
  let generation = -1;
  const state = {
    url: "",
    scene,
    acked: 0,
    pose: [0, 0, 0] as Vec3,
  };

  const server: Server = createServer((req: IncomingMessage, res: ServerResponse) => {
    const url = new URL(req.url ?? "/", "http://mock");
    const send = (code: number, body: unknown) => {
      res.writeHead(code, { "content-type": "application/json" });
      res.end(serviceJson(body));
    };

    if (req.method === "GET" && url.pathname === "/") {
      send(200, { service: "roomshift", sessions: 1 });
    } else if (req.method === "POST" && url.pathname === "/session") {
      req.resume();
      req.on("end", () => send(200, scene));
    } else if (req.method === "GET" && url.pathname === `/session/${MOCK_SESSION}`) {
      send(200, { ...scene, pose: state.pose });
    } else if (
      req.method === "GET" &&
      url.pathname === `/session/${MOCK_SESSION}/preview`
    ) {
      const src = url.searchParams.get("src") ?? "impulses";
      if (!["speech", "guitar", "impulses", "silence"].includes(src)) {
        send(404, { detail: `unknown source '${src}'` });
        return;
      }
      res.writeHead(200, { "content-type": "audio/wav" });
      const fs = scene.sample_rate;
      const chunkFrames = 4800;
      const nChunks = 4;
      res.write(wavHeader(chunkFrames * nChunks, 2, fs));
      let sent = 0;
      const pump = () => {
        const chunk = Buffer.alloc(chunkFrames * 2 * 4);
        if (src !== "silence") {
          for (let i = 0; i < chunkFrames; i++) {
            const x = 0.25 * Math.sin((2 * Math.PI * 440 * i) / fs);
            chunk.writeFloatLE(x, i * 8);
            chunk.writeFloatLE(x, i * 8 + 4);
          }
        }
        res.write(chunk);
        sent += 1;
        if (sent < nChunks) setTimeout(pump, 10);
        else res.end();
      };
      setTimeout(pump, 5);
    } else {
      send(404, { detail: "not found" });
    }
  });

  const wss = new WebSocketServer({ noServer: true });
  const clients = new Set<WebSocket>();

  server.on("upgrade", (req, socket, head) => {
    wss.handleUpgrade(req, socket, head, (ws) => {
      const match = /^\/session\/([^/]+)\/pose$/.exec(req.url ?? "");
      if (!match || match[1] !== MOCK_SESSION) {
        ws.close(4404);
        return;
      }
      clients.add(ws);
      ws.on("close", () => clients.delete(ws));
      ws.on("message", (raw) => {
        let pose: Vec3;
        try {
          const msg = JSON.parse(raw.toString());
          pose = [msg.x, msg.y, msg.z];
          if (!pose.every((v) => typeof v === "number" && Number.isFinite(v))) {
            throw new Error("bad pose");
          }
        } catch {
          ws.send(serviceJson({ error: "expected {x, y, z} with finite numbers" }));
          return;
        }
        const { pose: applied, clamped } = clampPose(pose, scene.walls);
        state.pose = applied;
        generation += 1;
        state.acked += 1;
        ws.send(
          serviceJson({
            applied,
            clamped,
            generation,
            params: scene.events.map((e) => {
              const d = Math.max(dist(e.position, applied), 0.05);
              return {
                event: e.index,
                gain: Math.min(e.distance_m / d, 4.0),
                time_shift_ms: ((d - e.distance_m) / 343.0) * 1e3,
              };
            }),
          }),
        );
      });
    });
  });

  await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
  const addr = server.address();
  if (!addr || typeof addr === "string") throw new Error("no address");
  state.url = `http://127.0.0.1:${addr.port}`;

  return {
    get url() {
      return state.url;
    },
    scene,
    get acked() {
      return state.acked;
    },
    get pose() {
      return state.pose;
    },
    kickClients() {
      for (const ws of clients) ws.terminate();
      clients.clear();
    },
    async close() {
      for (const ws of clients) ws.terminate();
      clients.clear();
      wss.close();
      await new Promise<void>((resolve) => server.close(() => resolve()));
    },
  };
}
