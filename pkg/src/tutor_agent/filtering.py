"""Query filtering: dedup against session history, blocklist, length cap."""

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BatchExhaustedError
from .querygen import QueryBatch, SearchQuery

DROP_DUPLICATE_SESSION = "duplicate_in_session"
DROP_DUPLICATE_BATCH = "duplicate_in_batch"
DROP_BLOCKLISTED = "blocklisted"
DROP_TOO_LONG = "too_long"


def normalize(text: str) -> str:
    """Case-fold, collapse whitespace, trim."""
    return re.sub(r"\s+", " ", text.casefold()).strip()


@dataclass(frozen=True)
class FilterPolicy:
    blocklist: frozenset[str] = frozenset()
    dedup_scope: str = "session"  # "session" or "batch"
    max_query_chars: int = 128

    def __post_init__(self) -> None:
        for term in self.blocklist:
            if not term or term != term.casefold():
                raise ValueError(f"blocklist terms must be non-empty lowercase: {term!r}")

    @classmethod
    def from_blocklist_file(cls, path: str | Path, **kwargs) -> "FilterPolicy":
        """One term per line, '#' comments, blank lines ignored."""
        terms = set()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                terms.add(line.casefold())
        return cls(blocklist=frozenset(terms), **kwargs)


@dataclass
class QueryHistory:
    session_id: str
    executed: set[str] = field(default_factory=set)


def _hits_blocklist(normalized: str, blocklist: frozenset[str]) -> bool:
    words = set(normalized.split())
    return any(term in words for term in blocklist)


def filter_batch(
    batch: QueryBatch,
    history: QueryHistory,
    policy: FilterPolicy,
    dropped: list[tuple[SearchQuery, str]] | None = None,
) -> list[SearchQuery]:
    """Drop blocked, over-long, and already-executed queries.

    Survivors keep their original text, order, and ranks, and are recorded
    in the session history so the same query never runs twice per session.
    Pass `dropped` to collect (query, reason) pairs for logging.
    """
    survivors = []
    seen_in_batch: set[str] = set()
    for query in batch.queries:
        norm = normalize(query.text)
        reason = None
        if policy.dedup_scope == "session" and norm in history.executed:
            reason = DROP_DUPLICATE_SESSION
        elif norm in seen_in_batch:
            reason = DROP_DUPLICATE_BATCH
        elif _hits_blocklist(norm, policy.blocklist):
            reason = DROP_BLOCKLISTED
        elif len(query.text) > policy.max_query_chars:
            reason = DROP_TOO_LONG
        if reason is not None:
            if dropped is not None:
                dropped.append((query, reason))
            continue
        seen_in_batch.add(norm)
        survivors.append(query)
    if not survivors:
        raise BatchExhaustedError(f"all queries dropped for window {batch.window_index}")
    if policy.dedup_scope == "session":
        history.executed.update(normalize(q.text) for q in survivors)
    return survivors
