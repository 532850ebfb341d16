"""Deterministic conversational layer: command grammar + BM25 retrieval."""

from .commands import AgentReply, apply_command, verbalize_kpi
from .grammar import AgentCommand, NoMatch, parse_utterance
from .retrieval import (
    Passage,
    RetrievalIndex,
    ScoredPassage,
    answer,
    build_index,
    index_texts,
    load_index,
    save_index,
    split_passages,
)

__all__ = [
    "AgentCommand", "NoMatch", "parse_utterance",
    "AgentReply", "apply_command", "verbalize_kpi",
    "Passage", "RetrievalIndex", "ScoredPassage",
    "answer", "build_index", "index_texts", "load_index", "save_index",
    "split_passages",
]


def known_sources(model) -> list[str]:
    """Qualified source refs ("kpi:x", "datasource:y") for slot matching."""
    refs = [f"datasource:{d.name}" for d in model.datasources]
    refs.extend(f"kpi:{k.name}" for k in model.kpis)
    return refs
