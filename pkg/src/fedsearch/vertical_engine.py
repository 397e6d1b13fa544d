"""Per-vertical inverted index with a BM25 first-pass ranker.

One index per vertical, immutable after build; searches against a built
index are safe to run concurrently. BM25 constants: k1=1.2, b=0.75,
IDF = ln((N - df + 0.5) / (df + 0.5) + 1), which keeps scores >= 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .domain import Document, ScoredDoc, Vertical
from .errors import DuplicateDocId, EmptyBlock, EmptyCorpus, EmptyQuery, MixedVertical

BM25_K1 = 1.2
BM25_B = 0.75

DEFAULT_BLOCK_TOP_M = 3
DEFAULT_K_BLOCK = 3


def tokenize(text: str) -> list[str]:
    return text.lower().split()


@dataclass(frozen=True)
class VerticalIndex:
    vertical: Vertical
    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    doc_count: int
    avg_doc_length: float
    docs: dict[str, Document]

    def to_dict(self) -> dict:
        return {
            "vertical": self.vertical.value,
            "postings": {t: [[d, tf] for d, tf in p] for t, p in self.postings.items()},
            "doc_lengths": self.doc_lengths,
            "doc_count": self.doc_count,
            "avg_doc_length": self.avg_doc_length,
            "docs": {i: d.to_dict() for i, d in self.docs.items()},
        }

    @staticmethod
    def from_dict(d: dict) -> "VerticalIndex":
        return VerticalIndex(
            vertical=Vertical(d["vertical"]),
            postings={t: [(e[0], int(e[1])) for e in p] for t, p in d["postings"].items()},
            doc_lengths={k: int(v) for k, v in d["doc_lengths"].items()},
            doc_count=int(d["doc_count"]),
            avg_doc_length=float(d["avg_doc_length"]),
            docs={i: Document.from_dict(x) for i, x in d["docs"].items()},
        )


@dataclass(frozen=True)
class VerticalResultList:
    vertical: Vertical
    results: tuple[ScoredDoc, ...]


def build_index(docs: list[Document], vertical: Vertical) -> VerticalIndex:
    if not docs:
        raise EmptyCorpus(f"no documents for vertical {vertical.value}")
    postings: dict[str, dict[str, int]] = {}
    doc_lengths: dict[str, int] = {}
    by_id: dict[str, Document] = {}
    for doc in docs:
        if doc.vertical is not vertical:
            raise MixedVertical(
                f"doc {doc.doc_id} is {doc.vertical.value}, expected {vertical.value}"
            )
        if doc.doc_id in by_id:
            raise DuplicateDocId(doc.doc_id)
        by_id[doc.doc_id] = doc
        doc_lengths[doc.doc_id] = len(doc.text)
        for term in doc.text:
            postings.setdefault(term, {}).setdefault(doc.doc_id, 0)
            postings[term][doc.doc_id] += 1
    return VerticalIndex(
        vertical=vertical,
        postings={t: sorted(tfs.items()) for t, tfs in postings.items()},
        doc_lengths=doc_lengths,
        doc_count=len(docs),
        avg_doc_length=sum(doc_lengths.values()) / len(doc_lengths),
        docs=by_id,
    )


def bm25_idf(n_docs: int, df: int) -> float:
    return math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)


def search(index: VerticalIndex, query: str, k: int) -> VerticalResultList:
    terms = tokenize(query)
    if not terms:
        raise EmptyQuery("query is empty after tokenization")
    scores: dict[str, float] = {}
    for term in terms:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = bm25_idf(index.doc_count, len(plist))
        for doc_id, tf in plist:
            dl = index.doc_lengths[doc_id]
            denom = tf + BM25_K1 * (1 - BM25_B + BM25_B * dl / index.avg_doc_length)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (BM25_K1 + 1) / denom
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    return VerticalResultList(
        vertical=index.vertical,
        results=tuple(ScoredDoc(index.docs[d], s) for d, s in ranked),
    )


def block_score(results: VerticalResultList, m: int = DEFAULT_BLOCK_TOP_M) -> float:
    """Mean base score of the top min(m, len) results."""
    if m < 1:
        raise ValueError(f"m must be positive: {m}")
    if not results.results:
        raise EmptyBlock(f"no results for vertical {results.vertical.value}")
    top = results.results[:m]
    return sum(r.base_score for r in top) / len(top)


def save_index(index: VerticalIndex, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(index.to_dict(), f, ensure_ascii=False, sort_keys=True)


def load_index(path: str | Path) -> VerticalIndex:
    with open(path, "r", encoding="utf-8") as f:
        return VerticalIndex.from_dict(json.load(f))
