import json

import pytest

from tutor_agent.config import AgentConfig
from tutor_agent.windowing import Utterance

CORPUS_RECORDS = [
    {"id": "img-volcanic-rocks", "tags": ["volcanic", "rocks"],
     "caption": "volcanic rocks overview chart", "file": "volcanic_rocks.png"},
    {"id": "img-magma-cooling", "tags": ["magma", "cooling"],
     "caption": "magma cooling stages diagram", "file": "magma.png"},
    {"id": "img-igneous", "tags": ["igneous", "rock", "basalt"],
     "caption": "igneous rock classification", "file": "igneous.png"},
    {"id": "img-lava-flow", "tags": ["lava", "flow"],
     "caption": "lava flow photo", "file": "lava.png"},
    {"id": "img-crystal", "tags": ["crystal", "crystallization"],
     "caption": "crystallization of minerals", "file": "crystal.png"},
]


@pytest.fixture
def corpus_dir(tmp_path):
    d = tmp_path / "corpus"
    d.mkdir()
    with (d / "corpus.jsonl").open("w", encoding="utf-8") as fh:
        for rec in CORPUS_RECORDS:
            fh.write(json.dumps(rec) + "\n")
    return d


@pytest.fixture
def make_config(corpus_dir):
    def _make(**overrides):
        base = dict(
            tick_interval_ms=10_000,
            output_count=5,
            cards_per_tick=3,
            mllm={"kind": "mock", "latency_ms": 0},
            search={"kind": "local_corpus", "corpus_dir": str(corpus_dir),
                    "per_query_limit": 8, "latency_ms": 0},
        )
        # Merge backend descriptors so tests can override a single key.
        for key in ("mllm", "search"):
            if key in overrides:
                merged = dict(base[key])
                merged.update(overrides.pop(key))
                base[key] = merged
        base.update(overrides)
        return AgentConfig(**base)

    return _make


def volcano_transcript():
    """25 s exchange; term for the crystal image first appears at 14 s."""
    return [
        Utterance("student", 0, 4000, "I don't understand volcanic rocks"),
        Utterance("instructor", 6000, 12000, "Volcanic rocks form when magma cools quickly"),
        Utterance("student", 14000, 18000, "What is crystallization of magma"),
        Utterance("instructor", 19000, 24000, "Crystallization happens as lava cools"),
    ]


@pytest.fixture
def transcript():
    return volcano_transcript()
