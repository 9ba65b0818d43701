import { afterAll, beforeAll, describe, expect, it } from "vitest";

import {
  createSession,
  fetchSession,
  parseServiceJson,
  poseUrl,
  previewUrl,
} from "../src/protocol";
import { connecting, connectionLost, initialState } from "../src/scene";
import { fitViewport, renderFrame } from "../src/view";
import { MOCK_SESSION, MockService, startMockService } from "./mockService";

describe("service json", () => {
  it("parses the bare Infinity tokens python writes", () => {
    const parsed = parseServiceJson('{"a": Infinity, "b": -Infinity, "c": NaN, "d": 1.5}');
    expect(parsed.a).toBe(Infinity);
    expect(parsed.b).toBe(-Infinity);
    expect(parsed.c).toBeNull();
    expect(parsed.d).toBe(1.5);
  });

  it("leaves ordinary json alone", () => {
    const parsed = parseServiceJson('{"events": [{"r_tilde": 0.25}], "n": -3}');
    expect(parsed.events[0].r_tilde).toBe(0.25);
    expect(parsed.n).toBe(-3);
  });
});

describe("urls", () => {
  it("derives the websocket url from the http base", () => {
    expect(poseUrl("http://127.0.0.1:8000", "abc")).toBe(
      "ws://127.0.0.1:8000/session/abc/pose",
    );
    expect(poseUrl("https://host:9", "abc")).toBe("wss://host:9/session/abc/pose");
  });

  it("builds preview urls with source and length", () => {
    const url = previewUrl("http://h:1", "abc", "speech", 4);
    expect(url).toBe("http://h:1/session/abc/preview?src=speech&seconds=4");
  });
});

describe("session endpoints", () => {
  let mock: MockService;

  beforeAll(async () => {
    mock = await startMockService();
  });

  afterAll(async () => {
    await mock.close();
  });

  it("fetches an existing session with its geometry", async () => {
    const info = await fetchSession(mock.url, MOCK_SESSION);
    expect(info.session).toBe(MOCK_SESSION);
    expect(info.events).toHaveLength(3);
    expect(info.walls).toHaveLength(2);
    expect(info.sample_rate).toBe(48000);
    // the unbounded radius survives the trip as a real Infinity
    expect(info.events[2].r_tilde).toBe(Infinity);
  });

  it("creates a session from an upload", async () => {
    const info = await createSession(
      mock.url,
      new Blob([new Uint8Array(64)]),
      { normalization: "n3d" },
    );
    expect(info.session).toBe(MOCK_SESSION);
    expect(info.n_events).toBe(3);
  });

  it("raises the service detail for an unknown session", async () => {
    await expect(fetchSession(mock.url, "missing")).rejects.toThrow(/not found/);
  });

  it("fails cleanly against a dead server and the scene still renders", async () => {
    let state = connecting(initialState());
    try {
      await fetchSession("http://127.0.0.1:1", MOCK_SESSION);
      throw new Error("expected a connection failure");
    } catch (err) {
      state = connectionLost(state, `service unreachable: ${err}`);
    }
    const frame = renderFrame(state, fitViewport(null, "xy", 640, 480));
    expect(frame.banner).toContain("unreachable");
    expect(frame.markers).toHaveLength(0);
    expect(frame.puck.world).toEqual([0, 0, 0]);
  });
});
