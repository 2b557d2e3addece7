"""Error taxonomy.

Everything raised deliberately by the package derives from GrfError so the
CLI can separate usage and data problems (exit code 2) from genuine bugs
(exit code 1).
"""

__all__ = [
    "GrfError",
    "ConfigError",
    "CorpusError",
    "FeedbackError",
    "FormatError",
    "GenerationError",
]


class GrfError(Exception):
    """Base class for expected failures: bad input, bad config, bad data."""


class ConfigError(GrfError):
    """Invalid configuration or parameter value."""


class CorpusError(GrfError):
    """Corpus ingestion problem: duplicate ids, malformed records."""


class FeedbackError(GrfError):
    """Degenerate feedback input: empty text, massless distribution."""


class FormatError(GrfError):
    """Malformed run, qrels, topics, fold, or persisted-index data."""


class GenerationError(GrfError):
    """Completion backend failure that survived retries."""
