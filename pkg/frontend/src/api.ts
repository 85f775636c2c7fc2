/** Thin REST/SSE client for the annotation service.
 *
 * The fetch implementation is injectable so unit tests can intercept every
 * request; nothing here computes any numbers itself.
 */

import { SseParser } from "./sse";
import type {
  ExportResult,
  IterEvent,
  KnotPayload,
  SessionInfo,
} from "./types";

export type FetchLike = typeof fetch;

export interface KnotEdit {
  index: number;
  x?: number;
  y?: number;
  pinned?: boolean;
}

export interface RunOptions {
  preset?: string;
  weights?: Partial<Record<"alpha" | "beta" | "mu" | "gamma" | "sigma", number>>;
  max_iters?: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let detail = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
    await raiseForStatus(resp);
    return (await resp.json()) as T;
  }

  async createSession(
    files: { name: string; data: Uint8Array }[],
  ): Promise<SessionInfo> {
    const form = new FormData();
    for (const f of files) {
      form.append("files", new Blob([f.data.buffer as ArrayBuffer]), f.name);
    }
    const resp = await this.fetchFn(this.baseUrl + "/sessions", {
      method: "POST",
      body: form,
    });
    await raiseForStatus(resp);
    return (await resp.json()) as SessionInfo;
  }

  init(
    sessionId: string,
    body: { x: number; y: number; radius?: number; n_knots?: number; preset?: string },
  ): Promise<KnotPayload> {
    return this.postJson(`/sessions/${sessionId}/init`, body);
  }

  run(sessionId: string, options: RunOptions = {}): Promise<{ state: string }> {
    return this.postJson(`/sessions/${sessionId}/run`, options);
  }

  pause(sessionId: string): Promise<{ state: string }> {
    return this.postJson(`/sessions/${sessionId}/pause`, {});
  }

  async patchKnots(sessionId: string, edits: KnotEdit[]): Promise<KnotPayload> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/knots`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ edits }),
    });
    await raiseForStatus(resp);
    return (await resp.json()) as KnotPayload;
  }

  async exportAnnotation(sessionId: string): Promise<ExportResult> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/export`);
    await raiseForStatus(resp);
    return (await resp.json()) as ExportResult;
  }

  nextSlice(
    sessionId: string,
  ): Promise<{ state: string; slice_index: number } & Partial<KnotPayload>> {
    return this.postJson(`/sessions/${sessionId}/next-slice`, {});
  }

  /** Subscribe to the iteration stream; resolves when "done" arrives.
   *
   * Each parsed iteration event is handed to `onEvent` in order; the
   * stream replays from the first iteration for late subscribers.
   */
  async streamEvents(
    sessionId: string,
    onEvent: (event: IterEvent) => void,
  ): Promise<void> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/events`);
    await raiseForStatus(resp);
    if (!resp.body) throw new ApiError(0, "response body is not streamable");
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      for (const evt of parser.feed(decoder.decode(value, { stream: true }))) {
        if (evt.event === "done") {
          await reader.cancel().catch(() => undefined);
          return;
        }
        const payload = JSON.parse(evt.data);
        if (payload.error !== undefined) {
          throw new ApiError(0, String(payload.error));
        }
        onEvent(payload as IterEvent);
      }
    }
  }
}
