/** Wires the client, reducer, and view into the live instructor panel. */

import { AgentClient } from "./client.js";
import { applyEvent, initialState, optimisticFeedback } from "./state.js";
import { render } from "./view.js";

export async function startPanel(
  root: HTMLElement,
  baseUrl: string,
  sessionId?: string,
): Promise<{ stop: () => void }> {
  const client = new AgentClient(baseUrl);
  const id = sessionId ?? (await client.createSession());
  const state = initialState();
  let stale = false;

  const callbacks = {
    onPin: (cardId: string) => feedback(cardId, "pin"),
    onDismiss: (cardId: string) => feedback(cardId, "dismiss"),
  };

  const redraw = () => render(root, state, stale, callbacks);

  const feedback = (cardId: string, action: "pin" | "dismiss") => {
    const { revert } = optimisticFeedback(state, cardId, action);
    redraw();
    client.sendFeedback(id, cardId, action).catch(() => {
      revert();
      redraw();
    });
  };

  const subscription = client.subscribe(id, {
    onEvent: (event) => {
      applyEvent(state, event);
      redraw();
    },
    onStale: (isStale) => {
      stale = isStale;
      redraw();
    },
    onClosed: redraw,
  });

  redraw();
  return { stop: () => subscription.stop() };
}
