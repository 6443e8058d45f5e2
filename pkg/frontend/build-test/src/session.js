/** Controller for the record-labeled-gestures -> retrain -> test loop. */
import { ApiError } from "./api.js";
import { applyStatus, beginTrainRun } from "./state.js";
export class SessionController {
    api;
    state;
    onChange;
    constructor(api, state, onChange = () => { }) {
        this.api = api;
        this.state = state;
        this.onChange = onChange;
    }
    /** Controls must be disabled while any session operation runs. */
    get controlsEnabled() {
        return this.state.busy === null && this.state.recording === null;
    }
    async refreshStatus() {
        const status = await this.api.status();
        applyStatus(this.state, status);
        this.onChange();
    }
    async record(gesture, seconds) {
        if (!this.controlsEnabled)
            return null;
        this.state.error = null;
        this.state.recording = { gesture, remainingS: seconds };
        this.onChange();
        try {
            const result = await this.api.record(gesture, seconds);
            this.state.datasetCounts = { ...result.counts };
            return result;
        }
        catch (err) {
            this.surface(err);
            return null;
        }
        finally {
            this.state.recording = null;
            this.onChange();
        }
    }
    /** Per-second countdown shown next to the record button. */
    tickRecording(elapsedS) {
        if (this.state.recording) {
            this.state.recording.remainingS =
                Math.max(0, this.state.recording.remainingS - elapsedS);
            this.onChange();
        }
    }
    async train(params) {
        if (!this.controlsEnabled)
            return null;
        this.state.error = null;
        this.state.busy = "train";
        const run = beginTrainRun(this.state, `steps=${params.steps}`);
        this.onChange();
        try {
            const result = await this.api.train(params);
            // the live train_progress stream already filled run.series;
            // reconcile with the authoritative response
            run.series = result.series.slice();
            run.finalTestAccuracy = result.final_test_accuracy;
            this.state.modelPresent = true;
            return result;
        }
        catch (err) {
            this.surface(err);
            return null;
        }
        finally {
            run.running = false;
            this.state.busy = null;
            this.onChange();
        }
    }
    surface(err) {
        if (err instanceof ApiError && err.status === 409) {
            this.state.error = "server busy: another session operation is running";
        }
        else if (err instanceof Error) {
            this.state.error = err.message;
        }
        else {
            this.state.error = String(err);
        }
    }
}
