/** Session state derived purely from the telemetry stream + HTTP responses. */

import { TraceBuffer } from "./traces.js";
import type {
  GestureName,
  StatusResponse,
  TelemetryMessage,
  TrainPoint,
} from "./types.js";

export interface Stamped {
  gesture: GestureName;
  confidence: number;
  tUs: number;
  receivedAtMs: number;
}

export interface TrainRun {
  label: string;
  series: TrainPoint[];
  finalTestAccuracy: number | null;
  running: boolean;
}

export interface SessionState {
  connected: boolean;
  lastMessageAtMs: number | null;
  traces: TraceBuffer;
  prediction: Stamped | null;
  lastEvent: Stamped | null;
  pose: number[];
  recording: { gesture: GestureName; remainingS: number } | null;
  datasetCounts: Record<string, number>;
  busy: string | null;
  modelPresent: boolean;
  trainRuns: TrainRun[];
  error: string | null;
}

export function initialState(): SessionState {
  return {
    connected: false,
    lastMessageAtMs: null,
    traces: new TraceBuffer(),
    prediction: null,
    lastEvent: null,
    pose: [90, 90, 90, 90, 90, 90, 90],
    recording: null,
    datasetCounts: {},
    busy: null,
    modelPresent: false,
    trainRuns: [],
    error: null,
  };
}

/** Fold one telemetry message into the state; cheap enough for 200 Hz. */
export function applyMessage(
  state: SessionState,
  msg: TelemetryMessage,
  nowMs: number,
): void {
  state.lastMessageAtMs = nowMs;
  switch (msg.type) {
    case "frame":
      state.traces.push(msg.t_us, msg.ch);
      break;
    case "prediction":
      state.prediction = {
        gesture: msg.gesture,
        confidence: msg.confidence,
        tUs: msg.t_us,
        receivedAtMs: nowMs,
      };
      break;
    case "gesture":
      state.lastEvent = {
        gesture: msg.gesture,
        confidence: msg.confidence,
        tUs: msg.t_us,
        receivedAtMs: nowMs,
      };
      break;
    case "pose":
      if (msg.angles.length === 7) state.pose = msg.angles.slice();
      break;
    case "train_progress": {
      const run = currentRun(state);
      run.series.push({
        step: msg.step,
        train_acc: msg.train_acc,
        val_acc: msg.val_acc,
        val_xent: msg.val_xent,
      });
      break;
    }
    case "window_rms":
    case "session":
      break; // displayed state comes from richer channels
  }
}

function currentRun(state: SessionState): TrainRun {
  const last = state.trainRuns[state.trainRuns.length - 1];
  if (last && last.running) return last;
  const run: TrainRun = {
    label: `run ${state.trainRuns.length + 1}`,
    series: [],
    finalTestAccuracy: null,
    running: true,
  };
  state.trainRuns.push(run);
  return run;
}

/** Rebuild server-owned state after a reload: /status is the source. */
export function applyStatus(state: SessionState, status: StatusResponse): void {
  state.datasetCounts = { ...status.dataset_counts };
  state.busy = status.busy;
  state.modelPresent = status.model_present;
}

export function beginTrainRun(state: SessionState, label: string): TrainRun {
  for (const run of state.trainRuns) run.running = false;
  const run: TrainRun = {
    label,
    series: [],
    finalTestAccuracy: null,
    running: true,
  };
  state.trainRuns.push(run);
  return run;
}
