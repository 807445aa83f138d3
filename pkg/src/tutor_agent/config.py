"""Agent configuration: JSON file in, constructed backends out."""

import json
from dataclasses import dataclass, field
from pathlib import Path

from .filtering import FilterPolicy
from .querygen import HTTPMLLMBackend, MockMLLMBackend, PromptTemplate
from .retrieval import LocalCorpusBackend, WebSearchBackend


@dataclass(frozen=True)
class AgentConfig:
    tick_interval_ms: int = 10_000
    output_count: int = 5
    cards_per_tick: int = 3
    mllm: dict = field(default_factory=lambda: {"kind": "mock"})
    search: dict = field(default_factory=dict)
    prompt_template_path: str | None = None
    blocklist_path: str | None = None
    log_dir: str | None = None
    max_window_ms: int | None = None  # default: unlimited cumulative window

    def __post_init__(self) -> None:
        if self.tick_interval_ms <= 0:
            raise ValueError("tick_interval_ms must be positive")
        if self.output_count < 1:
            raise ValueError("output_count must be >= 1")
        if self.cards_per_tick < 1:
            raise ValueError("cards_per_tick must be >= 1")

    @classmethod
    def from_file(cls, path: str | Path) -> "AgentConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**data)

    def build_template(self) -> PromptTemplate:
        if self.prompt_template_path:
            return PromptTemplate.from_file(self.prompt_template_path, self.output_count)
        return PromptTemplate.default(self.output_count)

    def build_policy(self) -> FilterPolicy:
        if self.blocklist_path:
            return FilterPolicy.from_blocklist_file(self.blocklist_path)
        return FilterPolicy()

    def build_mllm_backend(self):
        kind = self.mllm.get("kind", "mock")
        if kind == "mock":
            return MockMLLMBackend(
                output_count=self.output_count,
                latency_ms=self.mllm.get("latency_ms", 0),
            )
        if kind == "http":
            return HTTPMLLMBackend(
                endpoint=self.mllm["endpoint"],
                credential_env=self.mllm.get("credential_env"),
                timeout_ms=self.mllm.get("timeout_ms", 8000),
            )
        raise ValueError(f"unknown MLLM backend kind {kind!r}")

    def build_search_backend(self):
        kind = self.search.get("kind", "local_corpus")
        if kind == "local_corpus":
            return LocalCorpusBackend(
                corpus_dir=self.search["corpus_dir"],
                per_query_limit=self.search.get("per_query_limit", 8),
                latency_ms=self.search.get("latency_ms", 0),
            )
        if kind == "web_api":
            return WebSearchBackend(
                endpoint=self.search["endpoint"],
                credential_env=self.search.get("credential_env"),
                per_query_limit=self.search.get("per_query_limit", 8),
                timeout_ms=self.search.get("timeout_ms", 5000),
            )
        raise ValueError(f"unknown search backend kind {kind!r}")
