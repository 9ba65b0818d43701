// Wire types for the roomshift control service. Field names mirror the
// service JSON verbatim; the UI displays this geometry as sent and never
// recomputes walls or event positions on its own.

export type Vec3 = [number, number, number];

export interface EventSummary {
  index: number;
  toa_ms: number;
  azimuth_deg: number;
  zenith_deg: number;
  distance_m: number;
  position: Vec3;
  r_tilde: number;
}

export interface WallSummary {
  anchor: Vec3;
  normal: Vec3;
}

export interface SessionInfo {
  session: string;
  sample_rate: number;
  order: number;
  n_events: number;
  events: EventSummary[];
  walls: WallSummary[];
  pose?: Vec3;
}

export interface EventParams {
  event: number;
  gain: number;
  time_shift_ms: number;
}

export interface PoseAck {
  applied: Vec3;
  clamped: boolean;
  generation: number;
  params: EventParams[];
}

export interface ErrorFrame {
  error: string;
}

// The service serializes unbounded radii as a bare Infinity token (python's
// json module allows it) which JSON.parse rejects. 1e999 overflows back to
// Infinity on our side. None of the protocol's strings can contain these
// words, so a plain text substitution is safe.
export function parseServiceJson(text: string): any {
  const cleaned = text
    .replace(/-?\bInfinity\b/g, (m) => (m[0] === "-" ? "-1e999" : "1e999"))
    .replace(/\bNaN\b/g, "null");
  return JSON.parse(cleaned);
}

export function poseUrl(baseUrl: string, session: string): string {
  return `${baseUrl.replace(/^http/, "ws")}/session/${session}/pose`;
}

export function previewUrl(
  baseUrl: string,
  session: string,
  src: string,
  seconds: number,
): string {
  const query = new URLSearchParams({ src, seconds: String(seconds) });
  return `${baseUrl}/session/${session}/preview?${query}`;
}

async function readError(resp: Response): Promise<string> {
  try {
    const body = parseServiceJson(await resp.text());
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // fall through to the status line
  }
  return `HTTP ${resp.status}`;
}

export async function fetchSession(
  baseUrl: string,
  session: string,
  fetchFn: typeof fetch = fetch,
): Promise<SessionInfo> {
  const resp = await fetchFn(`${baseUrl}/session/${session}`);
  if (!resp.ok) throw new Error(await readError(resp));
  return parseServiceJson(await resp.text()) as SessionInfo;
}

export interface CreateSessionOptions {
  order?: number;
  maxEvents?: number;
  normalization?: "auto" | "n3d" | "sn3d";
}

export async function createSession(
  baseUrl: string,
  file: Blob,
  opts: CreateSessionOptions = {},
  fetchFn: typeof fetch = fetch,
): Promise<SessionInfo> {
  const query = new URLSearchParams();
  if (opts.order !== undefined) query.set("order", String(opts.order));
  if (opts.maxEvents !== undefined) query.set("max_events", String(opts.maxEvents));
  query.set("normalization", opts.normalization ?? "auto");
  const form = new FormData();
  form.append("file", file, "arir.wav");
  const resp = await fetchFn(`${baseUrl}/session?${query}`, {
    method: "POST",
    body: form,
  });
  if (!resp.ok) throw new Error(await readError(resp));
  return parseServiceJson(await resp.text()) as SessionInfo;
}
