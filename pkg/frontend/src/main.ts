/** DOM wiring: canvases, banner, and calibration controls. */

import { ApiClient } from "./api.js";
import { armSegments, palmRect } from "./armview.js";
import { tracePolyline, trainCurves } from "./charts.js";
import { TelemetryClient } from "./client.js";
import { RenderScheduler } from "./scheduler.js";
import { SessionController } from "./session.js";
import { initialState } from "./state.js";
import { MAX_DISPLAY_POINTS_PER_S, WINDOW_US } from "./traces.js";
import { GESTURE_NAMES, type GestureName } from "./types.js";

const CHANNEL_COLORS = ["#00f5d4", "#7b2cbf", "#ff6b6b", "#ffc107",
                        "#17a2b8", "#00ff88", "#ff4466", "#00aaff"];

const state = initialState();
const api = new ApiClient("");
const scheduler = new RenderScheduler(draw);
const session = new SessionController(api, state, () => scheduler.markDirty());

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function canvas(id: string): [HTMLCanvasElement, CanvasRenderingContext2D] {
  const el = $(id) as HTMLCanvasElement;
  const ctx = el.getContext("2d");
  if (!ctx) throw new Error(`no 2d context for #${id}`);
  return [el, ctx];
}

function drawTraces(): void {
  const [el, ctx] = canvas("traces");
  ctx.clearRect(0, 0, el.width, el.height);
  const laneH = el.height / 8;
  const latest = state.traces.channel(0).length
    ? state.traces.channel(0)[state.traces.channel(0).length - 1].tUs
    : 0;
  for (let c = 0; c < 8; c++) {
    const lane = { x: 0, y: c * laneH, w: el.width, h: laneH };
    ctx.strokeStyle = "rgba(255,255,255,0.08)";
    ctx.strokeRect(lane.x, lane.y, lane.w, lane.h);
    const pts = tracePolyline(
      state.traces.display(c, MAX_DISPLAY_POINTS_PER_S),
      lane, WINDOW_US, latest);
    if (pts.length < 2) continue;
    ctx.strokeStyle = CHANNEL_COLORS[c];
    ctx.beginPath();
    ctx.moveTo(pts[0].x, pts[0].y);
    for (const p of pts.slice(1)) ctx.lineTo(p.x, p.y);
    ctx.stroke();
  }
}

function drawArm(): void {
  const [el, ctx] = canvas("arm");
  ctx.clearRect(0, 0, el.width, el.height);
  const scale = el.width / 160;
  const palm = palmRect(scale);
  ctx.strokeStyle = "#8899aa";
  ctx.strokeRect(palm.x, palm.y, palm.w, palm.h);
  ctx.lineWidth = 3;
  for (const seg of armSegments(state.pose, scale)) {
    ctx.strokeStyle = seg.joint < 5 ? "#00f5d4" : "#8899aa";
    ctx.beginPath();
    ctx.moveTo(seg.x1, seg.y1);
    ctx.lineTo(seg.x2, seg.y2);
    ctx.stroke();
  }
  ctx.lineWidth = 1;
}

function drawCurves(): void {
  const [el, ctx] = canvas("curves");
  ctx.clearRect(0, 0, el.width, el.height);
  const area = { x: 30, y: 10, w: el.width - 40, h: el.height - 30 };
  ctx.strokeStyle = "rgba(255,255,255,0.2)";
  ctx.strokeRect(area.x, area.y, area.w, area.h);
  const palette = ["#00f5d4", "#ffc107", "#ff6b6b", "#00aaff", "#7b2cbf"];
  const curves = trainCurves(state.trainRuns, "val_xent", area);
  curves.forEach((curve, i) => {
    if (curve.points.length < 2) return;
    ctx.strokeStyle = palette[i % palette.length];
    ctx.beginPath();
    ctx.moveTo(curve.points[0].x, curve.points[0].y);
    for (const p of curve.points.slice(1)) ctx.lineTo(p.x, p.y);
    ctx.stroke();
  });
  const legend = curves.map((c, i) => `${c.label}`).join("  |  ");
  $("curve-legend").textContent =
    legend ? `validation cross-entropy: ${legend}` : "no training runs yet";
}

function draw(): void {
  $("conn").textContent = state.connected ? "connected" : "disconnected";
  $("conn").className = state.connected ? "ok" : "bad";

  const pred = state.prediction;
  $("banner").textContent = pred
    ? `${pred.gesture} (${(pred.confidence * 100).toFixed(1)}%)`
    : "no prediction yet";
  const event = state.lastEvent;
  $("event").textContent = event
    ? `last event: ${event.gesture} @ ${(event.tUs / 1e6).toFixed(2)}s`
    : "no events yet";

  $("counts").textContent = GESTURE_NAMES
    .map((g) => `${g}: ${state.datasetCounts[g] ?? 0}`)
    .join("   ");
  $("recording").textContent = state.recording
    ? `recording ${state.recording.gesture}: ${state.recording.remainingS.toFixed(0)}s left`
    : "";
  $("error").textContent = state.error ?? "";

  const enabled = session.controlsEnabled;
  ($("btn-record") as HTMLButtonElement).disabled = !enabled;
  ($("btn-train") as HTMLButtonElement).disabled = !enabled;

  drawTraces();
  drawArm();
  drawCurves();
}

function loop(): void {
  scheduler.tick(performance.now());
  requestAnimationFrame(loop);
}

function numberInput(id: string): number {
  return Number(($(id) as HTMLInputElement).value);
}

async function main(): Promise<void> {
  await session.refreshStatus().catch(() => { state.error = "hub unreachable"; });

  const wsUrl = `ws://${location.host}/ws`;
  const client = new TelemetryClient(wsUrl, state, {
    makeSocket: (url) => new WebSocket(url) as unknown as
      import("./client.js").WebSocketLike,
    now: () => performance.now(),
    onChange: () => scheduler.markDirty(),
  });
  client.start();

  $("btn-record").addEventListener("click", () => {
    const gesture = ($("gesture") as HTMLSelectElement).value as GestureName;
    const seconds = numberInput("seconds");
    const timer = setInterval(() => session.tickRecording(1), 1000);
    session.record(gesture, seconds).finally(() => clearInterval(timer));
  });

  $("btn-train").addEventListener("click", () => {
    session.train({
      steps: numberInput("steps"),
      batch: numberInput("batch"),
      lr: numberInput("lr"),
    }).then(() => session.refreshStatus());
  });

  scheduler.markDirty();
  loop();
}

main();
