import type {
  MindMapEnvelope,
  ReportView,
  SessionEvent,
  SnapshotView,
  UtteranceView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function jsonOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText || `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body, keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

/**
 * Incremental parser for text/event-stream bodies. Feed it raw chunks in
 * arrival order; it returns the events completed by each chunk and buffers
 * any trailing partial frame. Comment frames and non-data fields are ignored.
 */
export class SseParser {
  private buffer = "";

  push(chunk: string): SessionEvent[] {
    this.buffer += chunk;
    const events: SessionEvent[] = [];
    for (;;) {
      const split = this.buffer.match(/\r?\n\r?\n/);
      if (!split || split.index === undefined) break;
      const frame = this.buffer.slice(0, split.index);
      this.buffer = this.buffer.slice(split.index + split[0].length);
      const dataLines: string[] = [];
      for (const line of frame.split(/\r?\n/)) {
        if (line.startsWith("data:")) {
          dataLines.push(line.slice(5).replace(/^ /, ""));
        }
      }
      if (!dataLines.length) continue;
      try {
        events.push(JSON.parse(dataLines.join("\n")) as SessionEvent);
      } catch {
        // skip truncated or malformed frames rather than killing the stream
      }
    }
    return events;
  }
}

export interface CreateSessionResult {
  session_id: string;
  phase: string;
}

export interface InjectResult {
  accepted: boolean;
  pending: string;
}

export class SessionClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createSession(
    topic: string,
    goal: string,
    config?: Record<string, number>,
  ): Promise<CreateSessionResult> {
    const response = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ topic, goal, config: config ?? {} }),
    });
    return jsonOrThrow(response);
  }

  async snapshot(sessionId: string): Promise<SnapshotView> {
    return jsonOrThrow(await fetch(this.url(`/sessions/${sessionId}`)));
  }

  async step(sessionId: string): Promise<UtteranceView> {
    const response = await fetch(this.url(`/sessions/${sessionId}/step`), { method: "POST" });
    return jsonOrThrow(response);
  }

  async sendUtterance(sessionId: string, text: string): Promise<InjectResult> {
    const response = await fetch(this.url(`/sessions/${sessionId}/utterance`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    return jsonOrThrow(response);
  }

  async mindmap(sessionId: string): Promise<MindMapEnvelope> {
    return jsonOrThrow(await fetch(this.url(`/sessions/${sessionId}/mindmap`)));
  }

  async report(sessionId: string): Promise<ReportView> {
    return jsonOrThrow(await fetch(this.url(`/sessions/${sessionId}/report`)));
  }

  /**
   * Streams the session event log and invokes onEvent for every frame.
   * The server replays from index zero, so callers that already hold a
   * snapshot must drop events below their own high-water mark. Resolves
   * when the server closes the stream; rejects on transport errors.
   */
  async streamEvents(
    sessionId: string,
    onEvent: (event: SessionEvent) => void,
    options: { follow?: boolean; signal?: AbortSignal } = {},
  ): Promise<void> {
    const follow = options.follow === false ? 0 : 1;
    const response = await fetch(this.url(`/sessions/${sessionId}/events?follow=${follow}`), {
      headers: { Accept: "text/event-stream" },
      signal: options.signal,
    });
    if (!response.ok || !response.body) {
      throw new ApiError(response.status, `event stream unavailable (${response.status})`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      for (const event of parser.push(decoder.decode(value, { stream: true }))) {
        onEvent(event);
      }
    }
  }
}
