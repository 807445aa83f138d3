"""Prompt rendering, MLLM backends, and query-batch parsing.

Each tick renders one instruction prompt, sends it with the dialogue window
to a pluggable backend, and parses the single comma-separated response line
into exactly `output_count` ranked search queries.
"""

import base64
import os
import re
import time
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import httpx

from .clock import SessionClock
from .errors import BackendTimeoutError, MalformedResponseError
from .windowing import DialogueWindow

DEFAULT_EXEMPLAR = (
    "Cubic Function Increase-Decrease Graph, "
    "Cubic Function Extrema Graph Drawing Method, "
    "Derivative Extrema, "
    "Increase-Decrease Table Graph, "
    "Derivative Increase-Decrease Table"
)

_COUNT_WORDS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five",
    6: "six", 7: "seven", 8: "eight", 9: "nine", 10: "ten",
}


def _count_word(n: int) -> str:
    return _COUNT_WORDS.get(n, str(n))


@dataclass(frozen=True)
class PromptTemplate:
    text: str
    output_count: int = 5

    @classmethod
    def default(cls, output_count: int = 5) -> "PromptTemplate":
        text = (
            resources.files("tutor_agent.templates")
            .joinpath("default_prompt.txt")
            .read_text(encoding="utf-8")
        )
        return cls(text=text, output_count=output_count)

    @classmethod
    def from_file(cls, path: str | Path, output_count: int = 5) -> "PromptTemplate":
        return cls(Path(path).read_text(encoding="utf-8"), output_count)

    def render(self, exemplar: str = DEFAULT_EXEMPLAR) -> str:
        return self.text.replace("{{count}}", _count_word(self.output_count)).replace(
            "{{exemplar}}", exemplar
        )


@dataclass(frozen=True)
class SearchQuery:
    text: str
    rank: int


@dataclass(frozen=True)
class QueryBatch:
    session_id: str
    window_index: int
    queries: tuple[SearchQuery, ...]
    raw_response: str
    latency_ms: int


@dataclass(frozen=True)
class PromptPayload:
    """Instruction text plus the window content the backend sees.

    Simulation mode carries the speaker-tagged transcript; live mode may
    carry audio bytes instead.
    """

    instruction: str
    transcript: str | None = None
    audio: bytes | None = None
    audio_media_type: str | None = None


def render_prompt(template: PromptTemplate, window: DialogueWindow) -> PromptPayload:
    """Pair the rendered instruction with the window's content.

    The instruction text depends only on the template, so it is byte-identical
    across ticks.
    """
    if not window.utterances:
        raise ValueError("window is empty")
    audio_refs = [u.audio_ref for u in window.utterances if u.audio_ref]
    transcript = window.transcript() or None
    return PromptPayload(
        instruction=template.render(),
        transcript=transcript,
        audio=None if not audio_refs else b"",  # live adapters substitute real bytes
    )


def _split_top_level(line: str) -> list[str]:
    """Split on commas outside double quotes."""
    items = []
    buf = []
    in_quotes = False
    for ch in line:
        if ch == '"':
            in_quotes = not in_quotes
            buf.append(ch)
        elif ch == "," and not in_quotes:
            items.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    items.append("".join(buf))
    return items


def _clean_item(item: str) -> str:
    item = item.strip()
    if len(item) >= 2 and item[0] == item[-1] and item[0] in "\"'":
        item = item[1:-1].strip()
    if item.endswith("."):
        item = item[:-1].rstrip()
    return re.sub(r"\s+", " ", item)


def parse_query_line(raw: str, expected_count: int) -> list[str]:
    """Parse one comma-separated response line into query texts.

    Accepts surrounding quotes and a trailing period per item, collapses
    internal whitespace, and tolerates leading/trailing blank lines. Fails
    unless exactly `expected_count` non-empty items result; multi-line
    bodies (e.g. newline-separated lists) are rejected.
    """
    body = raw.strip()
    if "\n" in body:
        raise MalformedResponseError("response spans multiple lines")
    items = [_clean_item(i) for i in _split_top_level(body)]
    if any(not i for i in items):
        raise MalformedResponseError("empty query item")
    if len(items) != expected_count:
        raise MalformedResponseError(
            f"expected {expected_count} queries, got {len(items)}"
        )
    return items


@dataclass(frozen=True)
class BackendResponse:
    raw_text: str
    latency_ms: int = 0


# Tokens that never make useful search terms on their own.
STOP_WORDS = frozenset(
    """a an the i you we he she it they them this that these those is are was
    were be been being am do does did done don dont not no yes yeah ok okay
    of to in on at for with and or but so if then than as by from about what
    how why when where which who whom can could would should will shall may
    might must me my your our their his her its am im ive youre thats there
    here just like really very well um uh oh please thanks thank understand
    s t re ll ve d m
    understood know knows mean means explain tell said says say asked ask
    question""".split()
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def transcript_term_counts(window: DialogueWindow) -> Counter:
    """Case-folded term frequencies, student tokens weighted double."""
    counts: Counter = Counter()
    for u in window.utterances:
        if not u.text:
            continue
        weight = 2 if u.speaker == "student" else 1
        for tok in _TOKEN_RE.findall(u.text.casefold()):
            if tok in STOP_WORDS or tok.isdigit():
                continue
            counts[tok] += weight
    return counts


_PAD_SUFFIXES = ("diagram", "illustration", "chart", "figure", "overview")
_FALLBACK_TERMS = ("diagram", "illustration", "chart", "figure", "overview")


class MockMLLMBackend:
    """Deterministic stand-in for the hosted model.

    Ranks the window's content terms by weighted frequency (ties broken
    lexicographically) and answers with the top terms as single-term
    queries on one comma-separated line. Pure function of the transcript,
    so identical windows always yield identical batches.
    """

    def __init__(self, output_count: int = 5, latency_ms: int = 0) -> None:
        self.output_count = output_count
        self.latency_ms = latency_ms

    def rank_terms(self, window: DialogueWindow) -> list[str]:
        counts = transcript_term_counts(window)
        return [t for t, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]

    def queries_for(self, window: DialogueWindow) -> list[str]:
        terms = self.rank_terms(window)[: self.output_count]
        queries = list(terms)
        # Pad sparse windows deterministically so the batch contract holds.
        base = terms or list(_FALLBACK_TERMS)
        i = 0
        while len(queries) < self.output_count:
            head = base[i % len(base)]
            suffix = _PAD_SUFFIXES[i % len(_PAD_SUFFIXES)]
            candidate = f"{head} {suffix}" if terms else head
            if candidate not in queries:
                queries.append(candidate)
            i += 1
        return queries[: self.output_count]

    def generate(self, payload: PromptPayload, window: DialogueWindow) -> BackendResponse:
        return BackendResponse(
            raw_text=", ".join(self.queries_for(window)),
            latency_ms=self.latency_ms,
        )


class HTTPMLLMBackend:
    """Adapter for a hosted model behind an HTTP endpoint.

    Request: {"instruction": ..., "content": {"type": "transcript"|"audio", ...}}.
    Response: {"raw_text": ..., "latency_ms": ...}. Credentials come from an
    environment variable, never from config files.
    """

    def __init__(
        self,
        endpoint: str,
        credential_env: str | None = None,
        timeout_ms: int = 8000,
    ) -> None:
        self.endpoint = endpoint
        self.credential_env = credential_env
        self.timeout_ms = timeout_ms

    def _headers(self) -> dict:
        headers = {}
        if self.credential_env:
            token = os.environ.get(self.credential_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def generate(self, payload: PromptPayload, window: DialogueWindow) -> BackendResponse:
        if payload.audio is not None:
            content = {
                "type": "audio",
                "audio_b64": base64.b64encode(payload.audio).decode("ascii"),
                "media_type": payload.audio_media_type or "audio/wav",
            }
        else:
            content = {"type": "transcript", "text": payload.transcript or ""}
        started = time.monotonic()
        try:
            resp = httpx.post(
                self.endpoint,
                json={"instruction": payload.instruction, "content": content},
                headers=self._headers(),
                timeout=self.timeout_ms / 1000,
            )
            resp.raise_for_status()
            data = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise BackendTimeoutError(f"MLLM backend unreachable: {exc}") from exc
        elapsed_ms = int((time.monotonic() - started) * 1000)
        return BackendResponse(
            raw_text=data.get("raw_text", ""),
            latency_ms=int(data.get("latency_ms", elapsed_ms)),
        )


def generate_queries(
    backend,
    payload: PromptPayload,
    window: DialogueWindow,
    clock: SessionClock,
    output_count: int = 5,
) -> QueryBatch:
    """Invoke the backend and parse its response into a ranked batch.

    A malformed response gets exactly one retry; timeouts do not (bounded
    per-tick latency matters more than a second attempt).
    """
    started = clock.now_ms()
    raw = ""
    texts = None
    for attempt in range(2):
        resp = backend.generate(payload, window)
        clock.advance(resp.latency_ms)
        raw = resp.raw_text
        try:
            texts = parse_query_line(raw, output_count)
            break
        except MalformedResponseError:
            if attempt == 1:
                raise
    assert texts is not None
    queries = tuple(SearchQuery(text=t, rank=i + 1) for i, t in enumerate(texts))
    return QueryBatch(
        session_id=window.session_id,
        window_index=window.window_index,
        queries=queries,
        raw_response=raw,
        latency_ms=clock.now_ms() - started,
    )
