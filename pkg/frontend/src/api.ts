// Typed client for the scoring service. The dashboard never computes
// scores itself; everything it shows comes back from these calls.

import type {
  DistributionResponse,
  HeatmapResponse,
  PresetsResponse,
  PreviewRequest,
  PreviewResponse,
  ScoresResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

export interface ScoreFilters {
  algorithm?: string;
  scenario?: string;
  window?: number;
  recompute?: boolean;
}

type Fetch = typeof fetch;

export class ApiClient {
  // base is an origin prefix like "http://host:8765" or "" for same-origin
  constructor(
    readonly base: string = "",
    private readonly fetchImpl: Fetch = (...args) => fetch(...args),
  ) {}

  private url(path: string, params?: Record<string, unknown>): string {
    let query = "";
    if (params) {
      const pairs = Object.entries(params)
        .filter(([, v]) => v !== undefined && v !== null)
        .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`);
      if (pairs.length) query = "?" + pairs.join("&");
    }
    return `${this.base}/api/v1${path}${query}`;
  }

  private async request<T>(
    path: string,
    init?: RequestInit,
    params?: Record<string, unknown>,
  ): Promise<T> {
    const response = await this.fetchImpl(this.url(path, params), init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  scores(filters: ScoreFilters = {}): Promise<ScoresResponse> {
    return this.request<ScoresResponse>("/scores", undefined, { ...filters });
  }

  preview(body: PreviewRequest): Promise<PreviewResponse> {
    return this.request<PreviewResponse>("/score/preview", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  presets(): Promise<PresetsResponse> {
    return this.request<PresetsResponse>("/presets");
  }

  activatePreset(name: string): Promise<{ active: Record<string, string> }> {
    return this.request("/presets/active", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name }),
    });
  }

  heatmap(scenario?: string): Promise<HeatmapResponse> {
    return this.request<HeatmapResponse>("/report/heatmap", undefined, {
      scenario,
    });
  }

  distribution(scenario?: string): Promise<DistributionResponse> {
    return this.request<DistributionResponse>(
      "/report/distribution",
      undefined,
      { scenario },
    );
  }

  async scoresCsv(): Promise<string> {
    const response = await this.fetchImpl(this.url("/scores.csv"));
    if (!response.ok) {
      throw new ApiError(response.status, response.statusText);
    }
    return response.text();
  }

  streamUrl(): string {
    return this.url("/stream");
  }
}
