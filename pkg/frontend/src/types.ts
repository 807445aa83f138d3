/** Wire types mirrored from the agent service's event stream. */

export type EventKind =
  | "session_started"
  | "utterance"
  | "tick"
  | "batch_generated"
  | "batch_filtered"
  | "pool_ready"
  | "cards_emitted"
  | "tick_skipped"
  | "error"
  | "pin"
  | "dismiss"
  | "session_closed";

export interface SessionEvent {
  seq: number;
  at_ms: number;
  kind: EventKind;
  // Payload shape depends on kind; fields are accessed defensively.
  payload: Record<string, unknown>;
}

export type CardState = "shown" | "pinned" | "dismissed";

export interface CardView {
  cardId: string;
  imageId: string;
  title: string;
  thumbnail: string;
  sourceQuery: string;
  provenance: string;
  windowIndex: number;
  state: CardState;
}

export interface TimelineEntry {
  windowIndex: number;
  atMs: number;
  queriesGenerated: number;
  queriesKept: number;
  cardsEmitted: number;
  skippedReason: string | null;
  error: boolean;
}

export interface CardWire {
  card_id: string;
  image_id: string;
  title: string;
  thumbnail_ref: string;
  provenance: string;
  source_query: string;
  window_index: number;
}
