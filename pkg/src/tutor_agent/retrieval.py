"""Image search backends and per-tick result merging.

The five filtered queries run against a pluggable backend; per-query
rankings merge into one pool keyed by canonical image id, each candidate
keeping its best (query_rank, search_rank) pair.
"""

import json
import os
import re
import time
from dataclasses import dataclass, replace
from pathlib import Path
from urllib.parse import parse_qsl, urlencode, urlsplit, urlunsplit

import httpx

from .errors import EmptyPoolError
from .querygen import SearchQuery

_TRACKING_PARAMS = re.compile(r"^(utm_|gclid$|fbclid$|msclkid$|ref$)")


def canonical_url(url: str) -> str:
    """Lowercase scheme/host, drop fragment and tracking params, keep the rest."""
    parts = urlsplit(url)
    query = [
        (k, v)
        for k, v in parse_qsl(parts.query, keep_blank_values=True)
        if not _TRACKING_PARAMS.match(k.lower())
    ]
    return urlunsplit(
        (parts.scheme.lower(), parts.netloc.lower(), parts.path, urlencode(query), "")
    )


@dataclass(frozen=True)
class ImageCandidate:
    image_id: str
    title: str
    thumbnail_ref: str
    source_query: SearchQuery
    search_rank: int
    provenance: str
    query_rank: int = 0  # filled when merged into a pool

    @property
    def rank_pair(self) -> tuple[int, int]:
        return (self.query_rank, self.search_rank)


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    tags: tuple[str, ...]
    caption: str
    file: str


def local_corpus_score(query_text: str, record: CorpusRecord) -> int:
    """Tag hits count double, caption hits single."""
    query_tokens = set(query_text.casefold().split())
    tag_tokens = {t.casefold() for t in record.tags}
    caption_tokens = set(record.caption.casefold().split())
    return 2 * len(query_tokens & tag_tokens) + len(query_tokens & caption_tokens)


class LocalCorpusBackend:
    """Offline corpus backend: deterministic scoring over corpus.jsonl."""

    kind = "local_corpus"

    def __init__(self, corpus_dir: str | Path, per_query_limit: int = 8,
                 latency_ms: int = 0) -> None:
        self.corpus_dir = Path(corpus_dir)
        self.per_query_limit = per_query_limit
        self.latency_ms = latency_ms
        self.records = self._load()

    def _load(self) -> list[CorpusRecord]:
        records = []
        for line in (self.corpus_dir / "corpus.jsonl").read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            records.append(
                CorpusRecord(
                    id=rec["id"],
                    tags=tuple(rec["tags"]),
                    caption=rec["caption"],
                    file=rec["file"],
                )
            )
        return records

    def search(self, query: SearchQuery, limit: int | None = None) -> list[ImageCandidate]:
        limit = self.per_query_limit if limit is None else limit
        scored = [
            (local_corpus_score(query.text, rec), rec)
            for rec in self.records
        ]
        scored = [(s, r) for s, r in scored if s > 0]
        scored.sort(key=lambda sr: (-sr[0], sr[1].id))
        return [
            ImageCandidate(
                image_id=rec.id,
                title=rec.caption,
                thumbnail_ref=str(self.corpus_dir / rec.file),
                source_query=query,
                search_rank=i + 1,
                provenance=f"corpus:{rec.id}",
            )
            for i, (_, rec) in enumerate(scored[:limit])
        ]


class WebSearchBackend:
    """Adapter for an HTTP image-search API.

    Results are accepted in backend order; no re-ranking happens here.
    Expected response: {"results": [{"url", "title", "thumbnail", "page"}]}.
    """

    kind = "web_api"

    def __init__(self, endpoint: str, credential_env: str | None = None,
                 per_query_limit: int = 8, timeout_ms: int = 5000) -> None:
        self.endpoint = endpoint
        self.credential_env = credential_env
        self.per_query_limit = per_query_limit
        self.timeout_ms = timeout_ms
        self.latency_ms = 0

    def search(self, query: SearchQuery, limit: int | None = None) -> list[ImageCandidate]:
        limit = self.per_query_limit if limit is None else limit
        headers = {}
        if self.credential_env:
            token = os.environ.get(self.credential_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        try:
            resp = httpx.get(
                self.endpoint,
                params={"q": query.text, "limit": limit},
                headers=headers,
                timeout=self.timeout_ms / 1000,
            )
            resp.raise_for_status()
            results = resp.json().get("results", [])
        except (httpx.HTTPError, ValueError):
            # One failing query must not kill the tick.
            return []
        candidates = []
        for i, item in enumerate(results[:limit]):
            url = item.get("url", "")
            if not url:
                continue
            candidates.append(
                ImageCandidate(
                    image_id=canonical_url(url),
                    title=item.get("title", ""),
                    thumbnail_ref=item.get("thumbnail", url),
                    source_query=query,
                    search_rank=i + 1,
                    provenance=item.get("page", url),
                )
            )
        return candidates


def search_images(backend, query: SearchQuery, limit: int | None = None) -> list[ImageCandidate]:
    if not query.text.strip():
        raise ValueError("query is empty")
    return backend.search(query, limit)


def search_batch(backend, queries: list[SearchQuery]) -> dict[str, ImageCandidate]:
    """Run every query and merge by canonical image id.

    A candidate surfaced by several queries keeps the occurrence with the
    lexicographically smallest (query_rank, search_rank) pair.
    """
    if not queries:
        raise ValueError("need at least one query")
    pool: dict[str, ImageCandidate] = {}
    for query in queries:
        for cand in search_images(backend, query):
            cand = replace(cand, query_rank=query.rank)
            existing = pool.get(cand.image_id)
            if existing is None or cand.rank_pair < existing.rank_pair:
                pool[cand.image_id] = cand
    if not pool:
        raise EmptyPoolError("all queries returned empty")
    return pool
