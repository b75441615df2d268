/** Typed fetch wrappers for the /v1 API plus latest-wins request gating. */

import type { CurvesResponse, FieldError, GridParams, PlannerForm, Recommendation } from "./types.js";

/** A non-2xx response, carrying the server's parsed error body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly fieldErrors: FieldError[],
    message: string,
  ) {
    super(message);
  }
}

/** Connection-level failure (server unreachable, request not completed). */
export class NetworkError extends Error {}

function toApiError(status: number, body: unknown): ApiError {
  if (body && typeof body === "object") {
    const record = body as Record<string, unknown>;
    if (Array.isArray(record.errors)) {
      const fields = record.errors as FieldError[];
      const summary = fields.map((e) => `${e.field}: ${e.message}`).join("; ");
      return new ApiError(status, fields, summary);
    }
    if (typeof record.error === "string") {
      return new ApiError(status, [], record.error);
    }
  }
  return new ApiError(status, [], `request failed with status ${status}`);
}

async function request<T>(url: string, init: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") throw err;
    throw new NetworkError(String(err));
  }
  const body = await response.json().catch(() => null);
  if (!response.ok) throw toApiError(response.status, body);
  return body as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  health(signal?: AbortSignal): Promise<{ status: string }> {
    return request(`${this.baseUrl}/v1/health`, { signal });
  }

  groups(signal?: AbortSignal): Promise<{ groups: string[] }> {
    return request(`${this.baseUrl}/v1/landscape`, { signal });
  }

  curves(form: PlannerForm, grid: GridParams, signal?: AbortSignal): Promise<CurvesResponse> {
    const params = new URLSearchParams({
      from: String(grid.from),
      to: String(grid.to),
      step: String(grid.step),
      pctr: String(form.pctr),
      pcvr: String(form.pcvr),
      impressions: String(form.impressions),
    });
    const group = encodeURIComponent(form.group);
    return request(`${this.baseUrl}/v1/landscape/${group}/curves?${params}`, { signal });
  }

  recommend(form: PlannerForm, signal?: AbortSignal): Promise<Recommendation> {
    return request(`${this.baseUrl}/v1/recommend`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(form),
      signal,
    });
  }
}

/** At most one request in flight: starting a new one aborts the previous,
 * and a superseded call resolves to null instead of its (stale) result. */
export class LatestWins {
  private controller: AbortController | null = null;

  async run<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      const result = await task(controller.signal);
      return controller.signal.aborted ? null : result;
    } catch (err) {
      if (controller.signal.aborted) return null;
      throw err;
    } finally {
      if (this.controller === controller) this.controller = null;
    }
  }
}
