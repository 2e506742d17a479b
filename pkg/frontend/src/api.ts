/** Typed client for the annotation service. All engine interaction of the UI
 * goes through this module; nothing else talks to the network. */

import type {
  MetricsPayload,
  QueryPayload,
  StatePayload,
  SubmitResponse,
  Verdict,
} from "./types.js";

export type NextQueryResult =
  | { kind: "query"; query: QueryPayload }
  | { kind: "idle" };

export type SubmitResult =
  | { kind: "ok"; accepted: boolean; m: number }
  | { kind: "expired" }   // 409: lease lost
  | { kind: "unknown" };  // 404: query id gone

export class NetworkError extends Error {}

/** The slice of the API the annotator flow needs (narrow for testability). */
export interface AnnotationApi {
  fetchNextQuery(): Promise<NextQueryResult>;
  submitLabel(queryId: number, verdict: Verdict): Promise<SubmitResult>;
}

export class ApiClient implements AnnotationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly session: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    const sep = path.includes("?") ? "&" : "?";
    return `${this.baseUrl}${path}${sep}session=${encodeURIComponent(this.session)}`;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    try {
      return await this.fetchFn(this.url(path), init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
  }

  async fetchNextQuery(): Promise<NextQueryResult> {
    const resp = await this.request("/api/v1/queries/next");
    if (resp.status === 204) {
      return { kind: "idle" };
    }
    if (!resp.ok) {
      throw new NetworkError(`unexpected status ${resp.status}`);
    }
    return { kind: "query", query: (await resp.json()) as QueryPayload };
  }

  async submitLabel(queryId: number, verdict: Verdict): Promise<SubmitResult> {
    const resp = await this.request("/api/v1/labels", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ query_id: queryId, label: verdict }),
    });
    if (resp.status === 409) {
      return { kind: "expired" };
    }
    if (resp.status === 404) {
      return { kind: "unknown" };
    }
    if (!resp.ok) {
      throw new NetworkError(`unexpected status ${resp.status}`);
    }
    const body = (await resp.json()) as SubmitResponse;
    return { kind: "ok", accepted: body.accepted, m: body.m };
  }

  async getState(): Promise<StatePayload> {
    const resp = await this.request("/api/v1/state");
    if (!resp.ok) {
      throw new NetworkError(`unexpected status ${resp.status}`);
    }
    return (await resp.json()) as StatePayload;
  }

  async getMetrics(): Promise<MetricsPayload | null> {
    const resp = await this.request("/api/v1/metrics");
    if (resp.status === 204) {
      return null;
    }
    if (!resp.ok) {
      throw new NetworkError(`unexpected status ${resp.status}`);
    }
    return (await resp.json()) as MetricsPayload;
  }
}

export function randomSession(): string {
  return `ui-${Math.random().toString(36).slice(2, 10)}`;
}
