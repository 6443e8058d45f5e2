/** HTTP client for the hub's status + calibration endpoints. */
export class ApiError extends Error {
    status;
    constructor(message, status) {
        super(message);
        this.status = status;
    }
}
export class ApiClient {
    baseUrl;
    fetchImpl;
    constructor(baseUrl, fetchImpl = (...args) => fetch(...args)) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    async request(path, init) {
        const resp = await this.fetchImpl(this.baseUrl + path, init);
        const body = await resp.json().catch(() => ({}));
        if (!resp.ok) {
            const detail = body.error ?? resp.statusText;
            throw new ApiError(detail, resp.status);
        }
        return body;
    }
    status() {
        return this.request("/status");
    }
    record(gesture, seconds) {
        return this.request("/session/record", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ gesture, seconds }),
        });
    }
    train(params) {
        return this.request("/session/train", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(params),
        });
    }
}
