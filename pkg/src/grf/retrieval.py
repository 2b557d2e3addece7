"""BM25 scoring over the inverted index.

Queries are weighted term distributions, so plain keyword queries and
expanded feedback queries go through the same scorer: a document's score
is the weight-scaled sum of per-term BM25 contributions. Scoring order is
fixed (terms sorted, postings in ordinal order) so identical inputs give
bit-identical scores and tie-breaks.
"""

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .index import InvertedIndex
from .textproc import AnalyzerConfig, analyze, to_term_vector

__all__ = [
    "BM25Params",
    "WeightedQuery",
    "Ranking",
    "bm25_term_score",
    "search",
    "parse_plain_query",
]

_SOURCES = ("plain", "rm3", "grf")


@dataclass(frozen=True)
class BM25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self):
        if self.k1 < 0:
            raise ConfigError(f"k1 must be >= 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True)
class WeightedQuery:
    """Analyzed terms with positive weights; ``source`` records whether the
    weights came from the raw query or a feedback model."""

    weights: dict[str, float]
    source: str = "plain"

    def __post_init__(self):
        if self.source not in _SOURCES:
            raise ConfigError(f"unknown query source {self.source!r}")
        for term, weight in self.weights.items():
            if not weight > 0:
                raise ConfigError(f"non-positive weight {weight} for term {term!r}")


@dataclass
class Ranking:
    """Scored documents in non-increasing score order, ties broken by
    doc_id ascending. ``empty_query`` marks a query with no analyzed terms."""

    query_id: str
    entries: list[tuple[str, float]]
    empty_query: bool = False

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]


def bm25_idf(df: int, num_docs: int) -> float:
    """Non-negative idf: ln((N - df + 0.5)/(df + 0.5) + 1)."""
    return math.log((num_docs - df + 0.5) / (df + 0.5) + 1.0)


def bm25_term_score(
    tf: int,
    doc_len: int,
    df: int,
    num_docs: int,
    avg_doc_length: float,
    params: BM25Params,
) -> float:
    """One term's contribution to one document's score."""
    if tf < 1:
        raise ValueError(f"tf must be >= 1, got {tf}")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if doc_len < 1:
        raise ValueError(f"doc_len must be >= 1, got {doc_len}")
    idf = bm25_idf(df, num_docs)
    norm = params.k1 * (1.0 - params.b + params.b * doc_len / avg_doc_length)
    return idf * (tf * (params.k1 + 1.0)) / (tf + norm)


def search(
    index: InvertedIndex,
    query: WeightedQuery,
    params: BM25Params | None = None,
    depth: int = 1000,
    query_id: str = "",
) -> Ranking:
    """Rank documents for ``query``; only scoring documents that contain at
    least one query term."""
    if depth < 1:
        raise ConfigError(f"depth must be >= 1, got {depth}")
    if params is None:
        params = BM25Params()
    if not query.weights:
        return Ranking(query_id=query_id, entries=[], empty_query=True)
    scores: dict[int, float] = {}
    for term in sorted(query.weights):
        plist = index.postings.get(term)
        if not plist:
            continue
        weight = query.weights[term]
        df = len(plist)
        idf = bm25_idf(df, index.num_docs)
        k1 = params.k1
        b = params.b
        for ordinal, tf in plist:
            norm = k1 * (1.0 - b + b * index.doc_lengths[ordinal] / index.avg_doc_length)
            contribution = weight * (idf * (tf * (k1 + 1.0)) / (tf + norm))
            scores[ordinal] = scores.get(ordinal, 0.0) + contribution
    ranked = sorted(
        ((index.doc_ids[o], s) for o, s in scores.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return Ranking(query_id=query_id, entries=ranked[:depth])


def parse_plain_query(text: str, analyzer: AnalyzerConfig | None = None) -> WeightedQuery:
    """Analyze ``text`` and weight terms by in-query maximum likelihood,
    so duplicated query terms count double and weights sum to 1."""
    vec = to_term_vector(analyze(text, analyzer))
    if vec.total == 0:
        return WeightedQuery(weights={}, source="plain")
    weights = {term: count / vec.total for term, count in vec.counts.items()}
    return WeightedQuery(weights=weights, source="plain")
