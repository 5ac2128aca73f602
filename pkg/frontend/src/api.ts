// Typed client for the review service REST endpoints. The UI never
// invents state: every displayed count comes from one of these payloads.

export interface SessionStatus {
  status: string;
  found: number;
  coded: number;
  total: number;
  phase: string;
  treatment: string;
  name: string;
}

export interface CreatedSession extends SessionStatus {
  session: string;
  seed: number;
}

export interface BatchStudy {
  id: number;
  title: string;
  abstract: string;
  year: string;
  pdf_link: string;
}

export interface BatchPayload {
  phase: string;
  studies: BatchStudy[];
  exhausted: boolean;
}

export interface CurvePayload {
  points: [number, number][];
}

export interface CreateSessionRequest {
  csv?: string;
  dataset?: string;
  name?: string;
  treatment?: string;
  seed?: number;
}

export type LabelCode = "yes" | "no";

/** Server-side rejection carrying the service's error code and detail. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(detail || code);
    this.name = "ApiError";
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = `http ${response.status}`;
  let detail = "";
  try {
    const body = (await response.json()) as { error?: string; detail?: string };
    code = body.error ?? code;
    detail = body.detail ?? "";
  } catch {
    // non-JSON error body; keep the status code
  }
  return new ApiError(response.status, code, detail);
}

export class ReviewApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }

  createSession(request: CreateSessionRequest): Promise<CreatedSession> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(request),
    });
  }

  fetchBatch(session: string, signal?: AbortSignal): Promise<BatchPayload> {
    return this.request(`/sessions/${session}/batch`, { signal });
  }

  submitLabels(
    session: string,
    labels: Record<string, LabelCode>,
  ): Promise<SessionStatus> {
    return this.request(`/sessions/${session}/labels`, {
      method: "POST",
      body: JSON.stringify({ labels }),
    });
  }

  fetchStatus(session: string): Promise<SessionStatus> {
    return this.request(`/sessions/${session}/status`);
  }

  fetchCurve(session: string): Promise<CurvePayload> {
    return this.request(`/sessions/${session}/curve`);
  }

  restart(session: string): Promise<SessionStatus> {
    return this.request(`/sessions/${session}/restart`, { method: "POST" });
  }

  /** The export anchor points straight at the service stream. */
  exportUrl(session: string): string {
    return `${this.base}/sessions/${session}/export`;
  }
}
