/**
 * Event-sourced UI state.
 *
 * The panel is a pure function of the event sequence: feeding the same
 * events (live, after reconnect, or from a recorded log) always produces
 * the same grid. Events at or below `lastSeq` are ignored, so replays and
 * resumed streams apply each event exactly once.
 */

import type {
  CardView,
  CardWire,
  SessionEvent,
  TimelineEntry,
} from "./types.js";

export interface PanelState {
  sessionId: string | null;
  lastSeq: number;
  tickIntervalMs: number;
  closed: boolean;
  /** cardId -> card, in emission order. */
  cards: Map<string, CardView>;
  /** cardIds in the order they were pinned. */
  pinnedOrder: string[];
  /** windowIndex -> per-tick badges, in event order. */
  timeline: Map<number, TimelineEntry>;
}

export function initialState(): PanelState {
  return {
    sessionId: null,
    lastSeq: 0,
    tickIntervalMs: 10000,
    closed: false,
    cards: new Map(),
    pinnedOrder: [],
    timeline: new Map(),
  };
}

function timelineEntry(state: PanelState, windowIndex: number, atMs: number): TimelineEntry {
  let entry = state.timeline.get(windowIndex);
  if (!entry) {
    entry = {
      windowIndex,
      atMs,
      queriesGenerated: 0,
      queriesKept: 0,
      cardsEmitted: 0,
      skippedReason: null,
      error: false,
    };
    state.timeline.set(windowIndex, entry);
  }
  return entry;
}

/** Apply one server event. Duplicates (seq <= lastSeq) are no-ops. */
export function applyEvent(state: PanelState, event: SessionEvent): PanelState {
  if (event.seq <= state.lastSeq) {
    return state;
  }
  state.lastSeq = event.seq;
  const payload = event.payload;

  switch (event.kind) {
    case "session_started": {
      state.sessionId = (payload.session_id as string) ?? null;
      const interval = payload.tick_interval_ms as number | undefined;
      if (interval) state.tickIntervalMs = interval;
      break;
    }
    case "tick":
      timelineEntry(state, payload.window_index as number, event.at_ms);
      break;
    case "batch_generated": {
      const entry = timelineEntry(state, payload.window_index as number, event.at_ms);
      entry.queriesGenerated = (payload.queries as unknown[]).length;
      break;
    }
    case "batch_filtered": {
      const entry = timelineEntry(state, payload.window_index as number, event.at_ms);
      entry.queriesKept = (payload.kept as unknown[]).length;
      break;
    }
    case "cards_emitted": {
      const windowIndex = payload.window_index as number;
      const entry = timelineEntry(state, windowIndex, event.at_ms);
      const cards = payload.cards as unknown as CardWire[];
      entry.cardsEmitted += cards.length;
      for (const wire of cards) {
        if (state.cards.has(wire.card_id)) continue;
        state.cards.set(wire.card_id, {
          cardId: wire.card_id,
          imageId: wire.image_id,
          title: wire.title,
          thumbnail: wire.thumbnail_ref,
          sourceQuery: wire.source_query,
          provenance: wire.provenance,
          windowIndex: wire.window_index ?? windowIndex,
          state: "shown",
        });
      }
      break;
    }
    case "tick_skipped": {
      const entry = timelineEntry(state, payload.window_index as number, event.at_ms);
      entry.skippedReason = (payload.reason as string) ?? "unknown";
      break;
    }
    case "error": {
      const windowIndex = payload.window_index as number | undefined;
      if (windowIndex !== undefined) {
        timelineEntry(state, windowIndex, event.at_ms).error = true;
      }
      break;
    }
    case "pin":
      setCardState(state, payload.card_id as string, "pinned");
      break;
    case "dismiss":
      setCardState(state, payload.card_id as string, "dismissed");
      break;
    case "session_closed":
      state.closed = true;
      break;
    default:
      break;
  }
  return state;
}

export function applyEvents(state: PanelState, events: SessionEvent[]): PanelState {
  for (const event of events) applyEvent(state, event);
  return state;
}

function setCardState(state: PanelState, cardId: string, next: CardView["state"]): void {
  const card = state.cards.get(cardId);
  if (!card) return;
  if (card.state === "pinned" && next !== "pinned") {
    state.pinnedOrder = state.pinnedOrder.filter((id) => id !== cardId);
  }
  card.state = next;
  if (next === "pinned" && !state.pinnedOrder.includes(cardId)) {
    state.pinnedOrder.push(cardId);
  }
}

/**
 * Grid order: pinned cards first (in pin order), then the rest newest tick
 * first, within a tick in emission order. Dismissed cards never render.
 */
export function visibleCards(state: PanelState): CardView[] {
  const pinned = state.pinnedOrder
    .map((id) => state.cards.get(id))
    .filter((c): c is CardView => !!c && c.state === "pinned");
  const rest: CardView[] = [];
  for (const card of state.cards.values()) {
    if (card.state === "shown") rest.push(card);
  }
  // Stable sort: Map preserves emission order inside a tick.
  rest.sort((a, b) => b.windowIndex - a.windowIndex);
  return [...pinned, ...rest];
}

export function timelineEntries(state: PanelState): TimelineEntry[] {
  return [...state.timeline.values()].sort((a, b) => a.windowIndex - b.windowIndex);
}

/**
 * Optimistic pin/dismiss: flips local state immediately and returns an
 * undo that restores the snapshot if the server rejects the action. The
 * server's own pin/dismiss event later confirms the same transition
 * (idempotent via seq dedup plus matching state).
 */
export function optimisticFeedback(
  state: PanelState,
  cardId: string,
  action: "pin" | "dismiss",
): { revert: () => void } {
  const card = state.cards.get(cardId);
  if (!card) {
    return { revert: () => undefined };
  }
  const before = card.state;
  const beforePinned = [...state.pinnedOrder];
  setCardState(state, cardId, action === "pin" ? "pinned" : "dismissed");
  return {
    revert: () => {
      const current = state.cards.get(cardId);
      if (current) current.state = before;
      state.pinnedOrder = beforePinned;
    },
  };
}
