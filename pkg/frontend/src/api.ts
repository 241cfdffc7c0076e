import type {
  ApiClient,
  Overrides,
  SessionInfo,
  TaskPayload,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HttpApi implements ApiClient {
  private fetchFn: FetchLike;

  constructor(
    private baseUrl = "",
    fetchFn?: FetchLike
  ) {
    // bind so the default keeps working when called unattached to globalThis
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const payload = await response.json();
        if (payload && typeof payload.detail === "string") {
          detail = payload.detail;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(annotatorId: string, n?: number, seed?: number): Promise<SessionInfo> {
    return this.request("POST", "/sessions", {
      annotator_id: annotatorId,
      n: n ?? null,
      seed: seed ?? null,
    });
  }

  nextTask(sessionId: string): Promise<TaskPayload> {
    return this.request("GET", `/sessions/${sessionId}/next`);
  }

  submit(
    sessionId: string,
    tripleId: string,
    text: string,
    overrides: Overrides | null
  ): Promise<Verdict> {
    return this.request("POST", `/sessions/${sessionId}/submit`, {
      triple_id: tripleId,
      text,
      overrides,
    });
  }

  report(sessionId: string, tripleId: string): Promise<{ reported: boolean }> {
    return this.request("POST", `/sessions/${sessionId}/report`, {
      triple_id: tripleId,
    });
  }
}
