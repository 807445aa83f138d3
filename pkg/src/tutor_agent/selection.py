"""Candidate ordering, display dedup, and instructor feedback."""

from dataclasses import dataclass, field

from .errors import IllegalTransitionError, UnknownCardError
from .retrieval import ImageCandidate

STATE_SHOWN = "shown"
STATE_PINNED = "pinned"
STATE_DISMISSED = "dismissed"


@dataclass
class ImageCard:
    card_id: str
    candidate: ImageCandidate
    window_index: int
    emitted_at_ms: int
    state: str = STATE_SHOWN


@dataclass
class DisplayHistory:
    session_id: str
    shown_image_ids: set[str] = field(default_factory=set)
    dismissed_image_ids: set[str] = field(default_factory=set)
    cards: dict[str, ImageCard] = field(default_factory=dict)
    _next_card: int = 1

    def _new_card_id(self) -> str:
        card_id = f"{self.session_id}-c{self._next_card}"
        self._next_card += 1
        return card_id


def select_images(
    pool: dict[str, ImageCandidate],
    history: DisplayHistory,
    k: int,
    window_index: int,
    emitted_at_ms: int,
) -> list[ImageCard]:
    """Emit up to k cards from the pool, never repeating an image id.

    Order is (query_rank, search_rank) with ties broken by image id, so
    replaying a logged session reproduces the identical card sequence. An
    empty result after dedup is valid: the tick just emits nothing.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ordered = sorted(pool.values(), key=lambda c: (c.query_rank, c.search_rank, c.image_id))
    cards = []
    for cand in ordered:
        if len(cards) == k:
            break
        if cand.image_id in history.shown_image_ids:
            continue
        card = ImageCard(
            card_id=history._new_card_id(),
            candidate=cand,
            window_index=window_index,
            emitted_at_ms=emitted_at_ms,
        )
        history.shown_image_ids.add(cand.image_id)
        history.cards[card.card_id] = card
        cards.append(card)
    return cards


def apply_feedback(history: DisplayHistory, card_id: str, action: str) -> ImageCard:
    """Pin or dismiss a shown card. Dismissed images never reappear."""
    card = history.cards.get(card_id)
    if card is None:
        raise UnknownCardError(card_id)
    if action not in (STATE_PINNED, "pin", "dismiss", STATE_DISMISSED):
        raise ValueError(f"unknown action {action!r}")
    target = STATE_PINNED if action in ("pin", STATE_PINNED) else STATE_DISMISSED
    if card.state != STATE_SHOWN:
        raise IllegalTransitionError(f"{card_id} is {card.state}, not shown")
    card.state = target
    if target == STATE_DISMISSED:
        history.dismissed_image_ids.add(card.candidate.image_id)
    return card
