"""Text analysis shared by indexing, query parsing, and feedback estimation.

Pipeline: NFC-normalize, lowercase, split into runs of letters/digits,
drop stopwords, then Porter-stem the survivors. Stopword removal happens
before stemming so the list is matched against surface forms.
"""

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import ConfigError
from .porter import stem

__all__ = [
    "AnalyzerConfig",
    "TermVector",
    "analyze",
    "to_term_vector",
    "default_stopwords",
    "load_stopword_file",
]

# letters and digits in any script; underscore excluded
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_STEMMERS = ("porter", "none")


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    """The bundled 33-term English stopword list."""
    text = resources.files("grf.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return _parse_stopwords(text)


def _parse_stopwords(text: str) -> frozenset[str]:
    terms = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            terms.add(line.lower())
    return frozenset(terms)


def load_stopword_file(path) -> frozenset[str]:
    """Read a stopword file: one term per line, ``#`` comments allowed."""
    with open(path, encoding="utf-8") as fh:
        return _parse_stopwords(fh.read())


@dataclass(frozen=True)
class AnalyzerConfig:
    """Immutable analysis settings; a shared config keeps every stage
    (documents, queries, generated text) in the same term space."""

    stopword_list: frozenset[str] = field(default_factory=default_stopwords)
    stemmer: str = "porter"
    lowercase: bool = True

    def __post_init__(self):
        if self.stemmer not in _STEMMERS:
            raise ConfigError(
                f"unknown stemmer {self.stemmer!r}; expected one of {_STEMMERS}"
            )
        object.__setattr__(self, "stopword_list", frozenset(self.stopword_list))


@dataclass
class TermVector:
    """Bag of terms with its total count.

    ``counts`` holds no zero entries and iterates in sorted term order so
    downstream float accumulation is reproducible.
    """

    counts: dict[str, int]
    total: int

    @property
    def vocabulary_size(self) -> int:
        return len(self.counts)


def analyze(text: str, config: AnalyzerConfig | None = None) -> list[str]:
    """Tokenize ``text`` into analyzed terms, preserving order."""
    if config is None:
        config = AnalyzerConfig()
    text = unicodedata.normalize("NFC", text)
    if config.lowercase:
        text = text.lower()
    stop = config.stopword_list
    use_porter = config.stemmer == "porter"
    out = []
    for token in _TOKEN_RE.findall(text):
        if token in stop:
            continue
        out.append(stem(token) if use_porter else token)
    return out


def to_term_vector(tokens: list[str]) -> TermVector:
    """Count token multiplicities; keys are inserted in sorted order."""
    counts = Counter(tokens)
    return TermVector(
        counts={t: counts[t] for t in sorted(counts)}, total=len(tokens)
    )
