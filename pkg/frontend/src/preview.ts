// Streaming preview client. The service answers with a chunked 32-bit float
// WAV rendered block by block against the live pose, so playback has to
// start before the body is complete: parse the header, then forward frames
// to the sink as they arrive, tracking level and wire stalls for the UI.

import { previewUrl } from "./protocol";

export interface AudioSink {
  start(sampleRate: number, channels: number): void;
  push(samples: Float32Array): void; // interleaved
  stop(): void;
}

export interface WavFormat {
  channels: number;
  sampleRate: number;
}

const HEADER_BYTES = 44;

// canonical streaming header: RIFF/WAVE, 16-byte fmt chunk, IEEE float
export function parseWavHeader(bytes: Uint8Array): WavFormat {
  if (bytes.length < HEADER_BYTES) throw new Error("short wav header");
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const tag = (off: number) => String.fromCharCode(...bytes.subarray(off, off + 4));
  if (tag(0) !== "RIFF" || tag(8) !== "WAVE" || tag(12) !== "fmt ") {
    throw new Error("not a wav stream");
  }
  const format = view.getUint16(20, true);
  const bits = view.getUint16(34, true);
  if (format !== 3 || bits !== 32) throw new Error("expected float32 wav");
  return {
    channels: view.getUint16(22, true),
    sampleRate: view.getUint32(24, true),
  };
}

export interface PreviewOptions {
  fetchFn?: typeof fetch;
  stallMs?: number;
  seconds?: number;
  onMeter?: (db: number | null) => void;
  onBuffering?: (on: boolean) => void;
  onEnded?: () => void;
  onError?: (message: string) => void;
}

function levelDb(samples: Float32Array): number {
  let acc = 0;
  for (let i = 0; i < samples.length; i++) acc += samples[i] * samples[i];
  const rms = Math.sqrt(acc / Math.max(samples.length, 1));
  return rms > 0 ? 20 * Math.log10(rms) : -Infinity;
}

export class PreviewPlayer {
  playing = false;

  private abort: AbortController | null = null;
  private stallTimer: ReturnType<typeof setTimeout> | null = null;
  private buffering = false;

  constructor(
    private baseUrl: string,
    private sink: AudioSink,
    private opts: PreviewOptions = {},
  ) {}

  async start(session: string, src: string): Promise<void> {
    this.stop(); // switching sources restarts the stream
    const abort = new AbortController();
    this.abort = abort;
    this.playing = true;
    const fetchFn = this.opts.fetchFn ?? fetch;
    const url = previewUrl(this.baseUrl, session, src, this.opts.seconds ?? 4);

    let resp: Response;
    try {
      resp = await fetchFn(url, { signal: abort.signal });
    } catch (err) {
      if (!abort.signal.aborted) this.fail(String(err));
      return;
    }
    if (abort.signal.aborted) return;
    if (!resp.ok || !resp.body) {
      this.fail(`preview failed: HTTP ${resp.status}`);
      return;
    }

    const reader = resp.body.getReader();
    let pending = new Uint8Array(0);
    let started = false;
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (abort.signal.aborted) return;
        if (done) break;
        this.armStallTimer();
        if (this.buffering) this.setBuffering(false);

        const merged = new Uint8Array(pending.length + value.length);
        merged.set(pending);
        merged.set(value, pending.length);
        pending = merged;

        if (!started) {
          if (pending.length < HEADER_BYTES) continue;
          const format = parseWavHeader(pending);
          this.sink.start(format.sampleRate, format.channels);
          pending = pending.subarray(HEADER_BYTES);
          started = true;
        }

        const nFloats = pending.length >> 2;
        if (nFloats === 0) continue;
        // copy out: the chunk's byteOffset is rarely 4-aligned
        const samples = new Float32Array(nFloats);
        new Uint8Array(samples.buffer).set(pending.subarray(0, nFloats * 4));
        pending = pending.subarray(nFloats * 4);
        this.sink.push(samples);
        this.opts.onMeter?.(levelDb(samples));
      }
    } catch (err) {
      if (!abort.signal.aborted) this.fail(String(err));
      return;
    }
    // natural end of stream
    this.clearStallTimer();
    this.setBuffering(false);
    this.playing = false;
    this.sink.stop();
    this.opts.onMeter?.(null);
    this.opts.onEnded?.();
  }

  stop(): void {
    this.clearStallTimer();
    if (this.abort) {
      this.abort.abort();
      this.abort = null;
    }
    if (this.playing) {
      this.playing = false;
      this.sink.stop();
      this.opts.onMeter?.(null);
    }
    this.setBuffering(false);
  }

  private fail(message: string): void {
    this.clearStallTimer();
    this.setBuffering(false);
    this.playing = false;
    this.sink.stop();
    this.opts.onMeter?.(null);
    this.opts.onError?.(message);
  }

  private armStallTimer(): void {
    this.clearStallTimer();
    const wait = this.opts.stallMs ?? 500;
    this.stallTimer = setTimeout(() => {
      if (this.playing) this.setBuffering(true);
    }, wait);
  }

  private clearStallTimer(): void {
    if (this.stallTimer !== null) clearTimeout(this.stallTimer);
    this.stallTimer = null;
  }

  private setBuffering(on: boolean): void {
    if (this.buffering === on) return;
    this.buffering = on;
    this.opts.onBuffering?.(on);
  }
}
