"""Lexical hunk ranking so the pipeline runs end-to-end without a neural model.

Plain BM25 (k1=1.2, b=0.75) over bag-of-words hunk documents built from the
changeset log message plus the hunk's lines. Inputs follow the model input
limits: hunks truncated to 512 tokens, queries to 256.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import Hunk

HUNK_TOKEN_LIMIT = 512
QUERY_TOKEN_LIMIT = 256

_TOKEN_RE = re.compile(r"[a-z0-9_]+")


def index_tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class IndexedHunk:
    hunk_id: str
    class_name: str
    term_frequencies: dict[str, int]
    length: int


@dataclass
class HunkIndex:
    hunks: list[IndexedHunk]
    document_frequencies: dict[str, int]
    average_length: float

    def __len__(self) -> int:
        return len(self.hunks)


def hunk_document(hunk: Hunk, log_message: str = "") -> str:
    return "\n".join([log_message] + hunk.all_texts()) if log_message else "\n".join(hunk.all_texts())


def index_hunks(
    hunks: Sequence[Hunk],
    log_messages: Mapping[str, str] | None = None,
    token_limit: int = HUNK_TOKEN_LIMIT,
) -> HunkIndex:
    """Index hunks by term frequency; each document is truncated to the first
    `token_limit` tokens before counting."""
    log_messages = log_messages or {}
    indexed: list[IndexedHunk] = []
    document_frequencies: dict[str, int] = {}
    for hunk in sorted(hunks, key=lambda h: h.id):
        tokens = index_tokens(hunk_document(hunk, log_messages.get(hunk.changeset_id, "")))
        tokens = tokens[:token_limit]
        tf: dict[str, int] = {}
        for token in tokens:
            tf[token] = tf.get(token, 0) + 1
        for token in tf:
            document_frequencies[token] = document_frequencies.get(token, 0) + 1
        indexed.append(
            IndexedHunk(
                hunk_id=hunk.id,
                class_name=hunk.class_name,
                term_frequencies=tf,
                length=len(tokens),
            )
        )
    total_length = sum(d.length for d in indexed)
    average_length = total_length / len(indexed) if indexed else 0.0
    return HunkIndex(
        hunks=indexed,
        document_frequencies=document_frequencies,
        average_length=average_length,
    )


def bm25_score(
    query_counts: Mapping[str, int],
    doc: IndexedHunk,
    index: HunkIndex,
    k1: float = 1.2,
    b: float = 0.75,
) -> float:
    n_docs = len(index)
    score = 0.0
    for term, query_count in query_counts.items():
        tf = doc.term_frequencies.get(term, 0)
        if tf == 0:
            continue
        df = index.document_frequencies.get(term, 0)
        idf = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
        if index.average_length > 0:
            norm = k1 * (1.0 - b + b * doc.length / index.average_length)
        else:
            norm = k1
        score += query_count * idf * tf * (k1 + 1.0) / (tf + norm)
    return score


def rank(
    bug_report_text: str,
    index: HunkIndex,
    top_n: int,
    query_token_limit: int = QUERY_TOKEN_LIMIT,
    k1: float = 1.2,
    b: float = 0.75,
) -> list[tuple[str, float]]:
    """Top-n (hunk_id, score) pairs, score descending, ties by hunk id."""
    if not index.hunks:
        raise ValueError("index is empty")
    tokens = index_tokens(bug_report_text)[:query_token_limit]
    query_counts: dict[str, int] = {}
    for token in tokens:
        query_counts[token] = query_counts.get(token, 0) + 1
    scored = [(doc.hunk_id, bm25_score(query_counts, doc, index, k1, b)) for doc in index.hunks]
    scored.sort(key=lambda e: (-e[1], e[0]))
    return scored[:top_n]
