/**
 * Agent-service client: SSE event subscription with resume, and the
 * pin/dismiss control calls.
 *
 * Reconnection resumes from the last seen seq, so each event is applied
 * exactly once even across connection drops.
 */

import type { SessionEvent } from "./types.js";

export interface SubscriptionHandlers {
  onEvent: (event: SessionEvent) => void;
  /** Called with true while disconnected (stale indicator), false on resume. */
  onStale?: (stale: boolean) => void;
  onClosed?: () => void;
}

export interface Subscription {
  stop: () => void;
}

/** Parse one SSE frame body; comment frames (keepalives) yield null. */
export function parseSseFrame(frame: string): SessionEvent | null {
  const dataLines = frame
    .split("\n")
    .filter((line) => line.startsWith("data:"))
    .map((line) => line.slice(5).trimStart());
  if (dataLines.length === 0) return null;
  return JSON.parse(dataLines.join("\n")) as SessionEvent;
}

/** Split buffered SSE text into complete frames, returning the remainder. */
export function splitSseBuffer(buffer: string): { frames: string[]; rest: string } {
  const parts = buffer.split("\n\n");
  return { frames: parts.slice(0, -1), rest: parts[parts.length - 1] };
}

export class AgentClient {
  constructor(private readonly baseUrl: string) {}

  async createSession(): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/sessions`, { method: "POST" });
    if (!resp.ok) throw new Error(`create session failed: ${resp.status}`);
    const body = (await resp.json()) as { session_id: string };
    return body.session_id;
  }

  async sendFeedback(
    sessionId: string,
    cardId: string,
    action: "pin" | "dismiss",
  ): Promise<void> {
    const resp = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/cards/${cardId}/${action}`,
      { method: "POST" },
    );
    if (!resp.ok) {
      throw new Error(`${action} rejected: ${resp.status}`);
    }
  }

  async closeSession(sessionId: string): Promise<void> {
    await fetch(`${this.baseUrl}/sessions/${sessionId}`, { method: "DELETE" });
  }

  /**
   * Subscribe to the event stream, resuming from the last seen seq after
   * any connection loss until stop() is called or the session closes.
   */
  subscribe(
    sessionId: string,
    handlers: SubscriptionHandlers,
    opts: { fromSeq?: number; retryMs?: number } = {},
  ): Subscription {
    let lastSeq = opts.fromSeq ?? 0;
    const retryMs = opts.retryMs ?? 1000;
    let stopped = false;
    let controller: AbortController | null = null;

    const run = async () => {
      while (!stopped) {
        controller = new AbortController();
        try {
          const resp = await fetch(
            `${this.baseUrl}/sessions/${sessionId}/events?from_seq=${lastSeq}`,
            { signal: controller.signal },
          );
          if (!resp.ok || !resp.body) throw new Error(`stream failed: ${resp.status}`);
          handlers.onStale?.(false);
          const reader = resp.body.getReader();
          const decoder = new TextDecoder();
          let buffer = "";
          for (;;) {
            const { done, value } = await reader.read();
            if (done) break;
            buffer += decoder.decode(value, { stream: true });
            const { frames, rest } = splitSseBuffer(buffer);
            buffer = rest;
            for (const frame of frames) {
              const event = parseSseFrame(frame);
              if (!event || event.seq <= lastSeq) continue;
              lastSeq = event.seq;
              handlers.onEvent(event);
              if (event.kind === "session_closed") {
                stopped = true;
                handlers.onClosed?.();
              }
            }
          }
          if (!stopped) {
            // Server ended the stream: session is gone.
            stopped = true;
            handlers.onClosed?.();
          }
        } catch (err) {
          if (stopped) return;
          handlers.onStale?.(true);
          await new Promise((resolve) => setTimeout(resolve, retryMs));
        }
      }
    };
    void run();

    return {
      stop: () => {
        stopped = true;
        controller?.abort();
      },
    };
  }
}
