/**
 * DOM rendering. The whole panel re-renders from state on every event;
 * there is deliberately no search box — images arrive on their own and
 * the instructor only pins, dismisses, or follows a provenance link.
 */

import { PanelState, timelineEntries, visibleCards } from "./state.js";
import type { CardView, TimelineEntry } from "./types.js";

export interface ViewCallbacks {
  onPin: (cardId: string) => void;
  onDismiss: (cardId: string) => void;
}

function renderCard(card: CardView, callbacks: ViewCallbacks): HTMLElement {
  const el = document.createElement("article");
  el.className = `card card--${card.state}`;
  el.dataset.cardId = card.cardId;

  const img = document.createElement("img");
  img.src = card.thumbnail;
  img.alt = card.title;
  el.appendChild(img);

  const title = document.createElement("h3");
  title.textContent = card.title;
  el.appendChild(title);

  const query = document.createElement("p");
  query.className = "card__query";
  query.textContent = card.sourceQuery;
  el.appendChild(query);

  const badge = document.createElement("span");
  badge.className = "card__tick";
  badge.textContent = `tick ${card.windowIndex}`;
  el.appendChild(badge);

  // Source traceability: the provenance link always renders and opens
  // outside the panel so the session view stays put.
  const source = document.createElement("a");
  source.href = card.provenance;
  source.target = "_blank";
  source.rel = "noopener";
  source.textContent = "source";
  el.appendChild(source);

  const pin = document.createElement("button");
  pin.textContent = card.state === "pinned" ? "pinned" : "pin";
  pin.disabled = card.state === "pinned";
  pin.addEventListener("click", () => callbacks.onPin(card.cardId));
  el.appendChild(pin);

  const dismiss = document.createElement("button");
  dismiss.textContent = "dismiss";
  dismiss.addEventListener("click", () => callbacks.onDismiss(card.cardId));
  el.appendChild(dismiss);

  return el;
}

function renderTimelineEntry(entry: TimelineEntry): HTMLElement {
  const el = document.createElement("li");
  el.className = "timeline__entry";
  const badges = [
    `q:${entry.queriesGenerated}`,
    `kept:${entry.queriesKept}`,
    `cards:${entry.cardsEmitted}`,
  ];
  if (entry.skippedReason) badges.push(`skip:${entry.skippedReason}`);
  if (entry.error) badges.push("error");
  el.textContent = `tick ${entry.windowIndex} — ${badges.join(" ")}`;
  return el;
}

export function render(
  root: HTMLElement,
  state: PanelState,
  stale: boolean,
  callbacks: ViewCallbacks,
): void {
  root.textContent = "";

  const status = document.createElement("div");
  status.className = "status";
  if (stale) {
    status.classList.add("status--stale");
    status.textContent = "connection lost — resuming…";
  } else if (state.closed) {
    status.textContent = "session closed";
  } else {
    status.textContent = state.sessionId ? `session ${state.sessionId}` : "connecting…";
  }
  root.appendChild(status);

  const grid = document.createElement("section");
  grid.className = "grid";
  for (const card of visibleCards(state)) {
    grid.appendChild(renderCard(card, callbacks));
  }
  root.appendChild(grid);

  const timeline = document.createElement("ol");
  timeline.className = "timeline";
  for (const entry of timelineEntries(state)) {
    timeline.appendChild(renderTimelineEntry(entry));
  }
  root.appendChild(timeline);
}
