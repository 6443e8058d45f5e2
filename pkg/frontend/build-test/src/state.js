/** Session state derived purely from the telemetry stream + HTTP responses. */
import { TraceBuffer } from "./traces.js";
export function initialState() {
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
export function applyMessage(state, msg, nowMs) {
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
            if (msg.angles.length === 7)
                state.pose = msg.angles.slice();
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
function currentRun(state) {
    const last = state.trainRuns[state.trainRuns.length - 1];
    if (last && last.running)
        return last;
    const run = {
        label: `run ${state.trainRuns.length + 1}`,
        series: [],
        finalTestAccuracy: null,
        running: true,
    };
    state.trainRuns.push(run);
    return run;
}
/** Rebuild server-owned state after a reload: /status is the source. */
export function applyStatus(state, status) {
    state.datasetCounts = { ...status.dataset_counts };
    state.busy = status.busy;
    state.modelPresent = status.model_present;
}
export function beginTrainRun(state, label) {
    for (const run of state.trainRuns)
        run.running = false;
    const run = {
        label,
        series: [],
        finalTestAccuracy: null,
        running: true,
    };
    state.trainRuns.push(run);
    return run;
}
