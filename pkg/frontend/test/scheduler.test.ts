import assert from "node:assert/strict";
import { test } from "node:test";

import { RenderScheduler } from "../src/scheduler.js";
import { applyMessage, initialState } from "../src/state.js";

test("traces redraw at >= 10 fps while frames stream at 200 Hz", () => {
  let draws = 0;
  const scheduler = new RenderScheduler(() => { draws++; }, 100);
  const state = initialState();

  // simulate one second: 200 messages, animation loop at 60 fps
  let nowMs = 0;
  let nextFrameMs = 0;
  let frameIdx = 0;
  while (nowMs <= 1000) {
    while (nextFrameMs <= nowMs && frameIdx < 200) {
      applyMessage(state, { type: "frame", t_us: frameIdx * 5000,
                            ch: new Array(8).fill(0) }, nowMs);
      scheduler.markDirty();
      frameIdx++;
      nextFrameMs += 5;
    }
    scheduler.tick(nowMs);
    nowMs += 1000 / 60;
  }
  assert.ok(draws >= 10, `drew ${draws} times in one simulated second`);
});

test("gesture banner renders within 200 ms of the event message", () => {
  let bannerGesture: string | null = null;
  const state = initialState();
  const scheduler = new RenderScheduler(() => {
    bannerGesture = state.lastEvent?.gesture ?? null;
  }, 100);

  // steady stream, then an event at t=500 ms
  let drawnAtMs: number | null = null;
  for (let nowMs = 0; nowMs <= 1000; nowMs += 1000 / 60) {
    if (nowMs >= 500 && state.lastEvent === null) {
      applyMessage(state, { type: "gesture", gesture: "FIST",
                            confidence: 0.99, t_us: 500000 }, nowMs);
      scheduler.markDirty();
    }
    if (scheduler.tick(nowMs) && bannerGesture === "FIST" && drawnAtMs === null) {
      drawnAtMs = nowMs;
    }
  }
  assert.ok(drawnAtMs !== null, "banner never rendered the event");
  assert.ok(drawnAtMs! - 500 <= 200,
            `banner lagged ${(drawnAtMs! - 500).toFixed(0)} ms`);
});

test("idle scheduler does not redraw", () => {
  let draws = 0;
  const scheduler = new RenderScheduler(() => { draws++; }, 100);
  for (let nowMs = 0; nowMs <= 1000; nowMs += 16) {
    scheduler.tick(nowMs);
  }
  assert.equal(draws, 0);
});
