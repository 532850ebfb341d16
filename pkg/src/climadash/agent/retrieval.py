"""Extractive question answering: BM25 over paragraph passages.

A corpus directory of .txt/.md files is split on blank lines, adjacent
blocks greedily merged up to a token budget, and indexed with plain
Okapi BM25 (k1=1.2, b=0.75 by default). The index is immutable once
built; rebuilds swap it atomically at the caller.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

MAX_PASSAGE_TOKENS = 160
DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

_TOKEN = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric runs."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class Passage:
    doc_id: str
    ordinal: int
    text: str
    token_count: int


@dataclass(frozen=True)
class ScoredPassage:
    passage: Passage
    score: float

    def to_jsonable(self) -> dict:
        return {
            "doc_id": self.passage.doc_id,
            "ordinal": self.passage.ordinal,
            "text": self.passage.text,
            "score": self.score,
        }


@dataclass
class RetrievalIndex:
    passages: list[Passage] = field(default_factory=list)
    term_freqs: list[Counter] = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    doc_freq: Counter = field(default_factory=Counter)
    avgdl: float = 0.0
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    warnings: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.passages)


def split_passages(text: str, doc_id: str,
                   max_tokens: int = MAX_PASSAGE_TOKENS) -> list[Passage]:
    """Blank-line blocks, oversize blocks hard-split, then greedy merging of
    consecutive blocks up to max_tokens."""
    blocks: list[str] = []
    for block in re.split(r"\n\s*\n", text):
        block = block.strip()
        if not block:
            continue
        blocks.extend(_split_long_block(block, max_tokens))
    merged: list[str] = []
    for block in blocks:
        if merged:
            candidate = merged[-1] + "\n\n" + block
            if len(tokenize(candidate)) <= max_tokens:
                merged[-1] = candidate
                continue
        merged.append(block)
    return [
        Passage(doc_id, ordinal, text, len(tokenize(text)))
        for ordinal, text in enumerate(merged)
    ]


def _split_long_block(block: str, max_tokens: int) -> list[str]:
    spans = [m.span() for m in _TOKEN.finditer(block.lower())]
    if len(spans) <= max_tokens:
        return [block]
    parts = []
    start = 0
    for i in range(max_tokens, len(spans), max_tokens):
        cut = spans[i][0]  # cut just before the first token of the next chunk
        parts.append(block[start:cut].strip())
        start = cut
    parts.append(block[start:].strip())
    return [p for p in parts if p]


def build_index(corpus_dir: Path | str, k1: float = DEFAULT_K1,
                b: float = DEFAULT_B) -> RetrievalIndex:
    """Index every .txt/.md under corpus_dir (recursive, sorted paths)."""
    corpus_dir = Path(corpus_dir)
    index = RetrievalIndex(k1=k1, b=b)
    paths: list[Path] = []
    if corpus_dir.is_dir():
        paths = sorted(p for p in corpus_dir.rglob("*")
                       if p.is_file() and p.suffix in (".txt", ".md"))
    for path in paths:
        try:
            text = path.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            index.warnings.append(f"{path}: skipped ({exc.__class__.__name__})")
            continue
        doc_id = path.relative_to(corpus_dir).as_posix()
        for passage in split_passages(text, doc_id):
            _add_passage(index, passage)
    _finish(index)
    return index


def index_texts(texts: list[tuple[str, str]], k1: float = DEFAULT_K1,
                b: float = DEFAULT_B) -> RetrievalIndex:
    """Build an index from (doc_id, text) pairs; used by tests and the CLI."""
    index = RetrievalIndex(k1=k1, b=b)
    for doc_id, text in texts:
        for passage in split_passages(text, doc_id):
            _add_passage(index, passage)
    _finish(index)
    return index


def _add_passage(index: RetrievalIndex, passage: Passage) -> None:
    freqs = Counter(tokenize(passage.text))
    index.passages.append(passage)
    index.term_freqs.append(freqs)
    index.lengths.append(passage.token_count)
    for term in freqs:
        index.doc_freq[term] += 1


def _finish(index: RetrievalIndex) -> None:
    if index.passages:
        index.avgdl = sum(index.lengths) / len(index.lengths)


def idf(index: RetrievalIndex, term: str) -> float:
    n_t = index.doc_freq.get(term, 0)
    return math.log(1.0 + (index.n - n_t + 0.5) / (n_t + 0.5))


def score_passage(index: RetrievalIndex, terms: list[str], i: int) -> float:
    """BM25 score of passage i for already-deduplicated query terms."""
    freqs = index.term_freqs[i]
    norm = index.k1 * (1.0 - index.b + index.b * index.lengths[i] / index.avgdl)
    total = 0.0
    for term in terms:
        f = freqs.get(term, 0)
        if f == 0:
            continue
        total += idf(index, term) * (f * (index.k1 + 1.0)) / (f + norm)
    return total


def answer(question: str, index: RetrievalIndex, k: int = 3) -> list[ScoredPassage]:
    """Top-k passages with positive BM25 score, ties by (doc_id, ordinal)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if index.n == 0:
        return []
    terms = list(dict.fromkeys(tokenize(question)))  # dedupe, keep order
    scored = []
    for i in range(index.n):
        s = score_passage(index, terms, i)
        if s > 0.0:
            scored.append(ScoredPassage(index.passages[i], s))
    scored.sort(key=lambda sp: (-sp.score, sp.passage.doc_id, sp.passage.ordinal))
    return scored[:k]


# -- persistence ----------------------------------------------------------------


def save_index(index: RetrievalIndex, path: Path | str) -> None:
    doc = {
        "k1": index.k1,
        "b": index.b,
        "warnings": index.warnings,
        "passages": [
            {"doc_id": p.doc_id, "ordinal": p.ordinal, "text": p.text,
             "token_count": p.token_count}
            for p in index.passages
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n",
                    encoding="utf-8")


def load_index(path: Path | str) -> RetrievalIndex:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    index = RetrievalIndex(k1=doc.get("k1", DEFAULT_K1), b=doc.get("b", DEFAULT_B),
                           warnings=list(doc.get("warnings", [])))
    for p in doc["passages"]:
        _add_passage(index, Passage(p["doc_id"], p["ordinal"], p["text"],
                                    p["token_count"]))
    _finish(index)
    return index
