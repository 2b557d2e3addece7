"""Corpus ingestion and inverted index construction.

The index carries exactly the statistics first-pass scoring and feedback
estimation need: postings with term frequencies, document lengths, and
(on request) per-document term vectors for feedback over top-ranked
documents. A built index is immutable and safe for concurrent readers.
"""

import gzip
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import CorpusError, FormatError
from .textproc import AnalyzerConfig, TermVector, analyze, to_term_vector

__all__ = [
    "Document",
    "InvertedIndex",
    "build_index",
    "document_frequency",
    "load_corpus_jsonl",
    "save_index",
    "load_index",
]

_FORMAT_NAME = "grf-index"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Document:
    doc_id: str
    contents: str


@dataclass
class InvertedIndex:
    """Postings keyed by term, each a list of (doc_ordinal, tf) pairs
    sorted by ordinal. ``doc_vectors`` is present only when the index was
    built with ``store_vectors`` and is keyed by ordinal."""

    postings: dict[str, list[tuple[int, int]]]
    doc_lengths: list[int]
    doc_ids: list[str]
    num_docs: int
    avg_doc_length: float
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    doc_vectors: dict[int, TermVector] | None = None

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def vector_for(self, ordinal: int) -> TermVector:
        if self.doc_vectors is None:
            raise CorpusError(
                "index was built without document vectors; rebuild with store_vectors"
            )
        return self.doc_vectors[ordinal]


def document_frequency(index: InvertedIndex, term: str) -> int:
    """Number of documents containing ``term``; 0 when absent."""
    return index.document_frequency(term)


def build_index(
    corpus: Iterable[Document],
    analyzer: AnalyzerConfig | None = None,
    store_vectors: bool = False,
) -> InvertedIndex:
    """Analyze every document and build postings.

    Ordinals follow corpus order. Postings keys are inserted sorted so
    iteration order is reproducible across rebuilds.
    """
    if analyzer is None:
        analyzer = AnalyzerConfig()
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_ids: list[str] = []
    doc_lengths: list[int] = []
    vectors: dict[int, TermVector] | None = {} if store_vectors else None
    seen: set[str] = set()
    for ordinal, doc in enumerate(corpus):
        if not doc.doc_id:
            raise CorpusError(f"record {ordinal}: empty doc_id")
        if doc.doc_id in seen:
            raise CorpusError(f"duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        vec = to_term_vector(analyze(doc.contents, analyzer))
        doc_ids.append(doc.doc_id)
        doc_lengths.append(vec.total)
        for term, tf in vec.counts.items():
            postings.setdefault(term, []).append((ordinal, tf))
        if vectors is not None:
            vectors[ordinal] = vec
    num_docs = len(doc_ids)
    avg = sum(doc_lengths) / num_docs if num_docs else 0.0
    return InvertedIndex(
        postings={t: postings[t] for t in sorted(postings)},
        doc_lengths=doc_lengths,
        doc_ids=doc_ids,
        num_docs=num_docs,
        avg_doc_length=avg,
        analyzer=analyzer,
        doc_vectors=vectors,
    )


def load_corpus_jsonl(path) -> Iterator[Document]:
    """Yield documents from a JSON-lines file with ``id`` and ``contents``
    fields. Blank lines are skipped; anything else malformed is an error
    naming the line."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"line {lineno}: expected an object")
            for key in ("id", "contents"):
                if key not in record:
                    raise CorpusError(f"line {lineno}: missing field {key!r}")
            yield Document(doc_id=str(record["id"]), contents=str(record["contents"]))


def save_index(index: InvertedIndex, path) -> None:
    """Persist as gzipped JSON with a format/version header."""
    payload = {
        "format": _FORMAT_NAME,
        "version": _FORMAT_VERSION,
        "analyzer": {
            "stopword_list": sorted(index.analyzer.stopword_list),
            "stemmer": index.analyzer.stemmer,
            "lowercase": index.analyzer.lowercase,
        },
        "doc_ids": index.doc_ids,
        "doc_lengths": index.doc_lengths,
        "postings": {t: [[o, tf] for o, tf in plist] for t, plist in index.postings.items()},
        "doc_vectors": None
        if index.doc_vectors is None
        else {
            str(o): {"counts": vec.counts, "total": vec.total}
            for o, vec in index.doc_vectors.items()
        },
    }
    with gzip.open(path, "wt", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))


def load_index(path) -> InvertedIndex:
    try:
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read index file {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != _FORMAT_NAME:
        raise FormatError(f"{path} is not an index file")
    if payload.get("version") != _FORMAT_VERSION:
        raise FormatError(
            f"unsupported index version {payload.get('version')!r}"
        )
    analyzer = AnalyzerConfig(
        stopword_list=frozenset(payload["analyzer"]["stopword_list"]),
        stemmer=payload["analyzer"]["stemmer"],
        lowercase=payload["analyzer"]["lowercase"],
    )
    doc_lengths = list(payload["doc_lengths"])
    doc_ids = list(payload["doc_ids"])
    num_docs = len(doc_ids)
    raw_vectors = payload.get("doc_vectors")
    vectors = None
    if raw_vectors is not None:
        vectors = {
            int(o): TermVector(counts=entry["counts"], total=entry["total"])
            for o, entry in raw_vectors.items()
        }
    return InvertedIndex(
        postings={t: [(o, tf) for o, tf in plist] for t, plist in payload["postings"].items()},
        doc_lengths=doc_lengths,
        doc_ids=doc_ids,
        num_docs=num_docs,
        avg_doc_length=sum(doc_lengths) / num_docs if num_docs else 0.0,
        analyzer=analyzer,
        doc_vectors=vectors,
    )
