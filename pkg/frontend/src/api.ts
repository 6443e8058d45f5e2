/** HTTP client for the hub's status + calibration endpoints. */

import type {
  GestureName,
  RecordResponse,
  StatusResponse,
  TrainResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(message: string, public status: number) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail = (body as { error?: string }).error ?? resp.statusText;
      throw new ApiError(detail, resp.status);
    }
    return body as T;
  }

  status(): Promise<StatusResponse> {
    return this.request<StatusResponse>("/status");
  }

  record(gesture: GestureName, seconds: number): Promise<RecordResponse> {
    return this.request<RecordResponse>("/session/record", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ gesture, seconds }),
    });
  }

  train(params: { steps: number; batch: number; lr: number }): Promise<TrainResponse> {
    return this.request<TrainResponse>("/session/train", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(params),
    });
  }
}
