/**
 * End-to-end tests against the real agent service over HTTP: the panel
 * consumes only the public endpoints and the SSE event stream.
 */

import { spawn, ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AgentClient } from "../src/client.js";
import {
  applyEvent,
  applyEvents,
  initialState,
  optimisticFeedback,
  visibleCards,
  PanelState,
} from "../src/state.js";
import type { SessionEvent } from "../src/types.js";

const PORT = 8931 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let client: AgentClient;

async function waitForServer(timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/openapi.json`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("server did not start");
    await sleep(100);
  }
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

async function waitFor(predicate: () => boolean, timeoutMs = 10000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) throw new Error("condition not reached");
    await sleep(25);
  }
}

async function fetchEventsUpTo(sessionId: string, uptoSeq: number): Promise<SessionEvent[]> {
  // Offline-style read: collect the log prefix up to a known seq.
  const events: SessionEvent[] = [];
  const sub = client.subscribe(sessionId, {
    onEvent: (event) => events.push(event),
  });
  await waitFor(() => events.length > 0 && events[events.length - 1].seq >= uptoSeq);
  sub.stop();
  return events.filter((e) => e.seq <= uptoSeq);
}

beforeAll(async () => {
  server = spawn("python3", [new URL("./run_server.py", import.meta.url).pathname, String(PORT)], {
    stdio: "inherit",
  });
  await waitForServer();
  client = new AgentClient(BASE);
}, 30000);

afterAll(() => {
  server?.kill();
});

async function startSessionWithDialogue(): Promise<string> {
  const sessionId = await client.createSession();
  const resp = await fetch(`${BASE}/sessions/${sessionId}/utterances`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({
      speaker: "student",
      start_ms: 0,
      end_ms: 4000,
      text: "I don't understand volcanic rocks",
    }),
  });
  expect(resp.ok).toBe(true);
  return sessionId;
}

describe("instructor panel against the live service", () => {
  it("renders cards from the live stream and survives reconnect without duplicates", async () => {
    const sessionId = await startSessionWithDialogue();
    const state = initialState();
    const sub = client.subscribe(sessionId, {
      onEvent: (event) => applyEvent(state, event),
    });
    await waitFor(() => visibleCards(state).length > 0);
    sub.stop();

    const cardCount = visibleCards(state).length;
    const seqBefore = state.lastSeq;

    // Reconnect mid-session from the last seen seq: nothing is re-applied.
    const sub2 = client.subscribe(sessionId, {
      onEvent: (event) => applyEvent(state, event),
    }, { fromSeq: state.lastSeq });
    await waitFor(() => state.lastSeq > seqBefore);
    sub2.stop();

    expect(visibleCards(state).length).toBe(cardCount);
    const ids = visibleCards(state).map((c) => c.cardId);
    expect(new Set(ids).size).toBe(ids.length);

    await client.closeSession(sessionId);
  }, 20000);

  it("pin/dismiss round-trips into the server log and dismissed cards never re-render", async () => {
    const sessionId = await startSessionWithDialogue();
    const state = initialState();
    const sub = client.subscribe(sessionId, {
      onEvent: (event) => applyEvent(state, event),
    });
    await waitFor(() => visibleCards(state).length >= 2);

    const [first, second] = visibleCards(state);
    optimisticFeedback(state, first.cardId, "pin");
    await client.sendFeedback(sessionId, first.cardId, "pin");
    optimisticFeedback(state, second.cardId, "dismiss");
    await client.sendFeedback(sessionId, second.cardId, "dismiss");

    // The actions come back as server events.
    await waitFor(() =>
      state.cards.get(first.cardId)?.state === "pinned" &&
      state.cards.get(second.cardId)?.state === "dismissed",
    );

    // Let a few more ticks pass; the dismissed image must stay gone.
    await sleep(500);
    sub.stop();
    const shown = visibleCards(state);
    expect(shown[0].cardId).toBe(first.cardId);
    expect(shown.some((c) => c.imageId === second.imageId)).toBe(false);

    const logged = await fetchEventsUpTo(sessionId, state.lastSeq);
    const kinds = logged.map((e) => e.kind);
    expect(kinds).toContain("pin");
    expect(kinds).toContain("dismiss");
    const pinEvent = logged.find((e) => e.kind === "pin")!;
    expect(pinEvent.payload.card_id).toBe(first.cardId);

    await client.closeSession(sessionId);
  }, 20000);

  it("offline replay of the recorded log reproduces the live final grid", async () => {
    const sessionId = await startSessionWithDialogue();
    const live = initialState();
    const sub = client.subscribe(sessionId, {
      onEvent: (event) => applyEvent(live, event),
    });
    await waitFor(() => visibleCards(live).length > 0);
    const firstCard = visibleCards(live)[0];
    await client.sendFeedback(sessionId, firstCard.cardId, "pin");
    await waitFor(() => live.cards.get(firstCard.cardId)?.state === "pinned");
    sub.stop();

    // Replay the recorded event log into a fresh state, offline.
    const recorded = await fetchEventsUpTo(sessionId, live.lastSeq);
    const replayed: PanelState = applyEvents(initialState(), recorded);

    expect(visibleCards(replayed)).toEqual(visibleCards(live));
    expect(replayed.pinnedOrder).toEqual(live.pinnedOrder);

    await client.closeSession(sessionId);
  }, 20000);

  it("rolls back an optimistic action the server rejects", async () => {
    const sessionId = await startSessionWithDialogue();
    const state = initialState();
    const sub = client.subscribe(sessionId, {
      onEvent: (event) => applyEvent(state, event),
    });
    await waitFor(() => visibleCards(state).length > 0);
    sub.stop();

    const ghost = "no-such-card";
    const { revert } = optimisticFeedback(state, ghost, "pin");
    await expect(client.sendFeedback(sessionId, ghost, "pin")).rejects.toThrow();
    revert();
    expect(visibleCards(state).every((c) => c.state !== "pinned")).toBe(true);

    await client.closeSession(sessionId);
  }, 20000);
});
