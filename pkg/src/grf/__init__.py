"""Lexical retrieval with BM25, RM3, and generative relevance feedback.

The package splits into small modules; the names most callers need are
re-exported here so ``from grf import ...`` works for the common path:
analyze a corpus, build an index, run BM25 or a feedback method, evaluate
against qrels, and tune parameters by grid search.
"""

from .errors import (
    ConfigError,
    CorpusError,
    FeedbackError,
    FormatError,
    GenerationError,
    GrfError,
)
from .evaluation import (
    EvalReport,
    Qrels,
    RunFile,
    TTestResult,
    average_precision,
    evaluate,
    ndcg_at_10,
    paired_t_test,
    parse_qrels,
    parse_run,
    recall_at_1000,
    write_run,
)
from .feedback import (
    FeedbackModel,
    GRFParams,
    RM3Params,
    concat_generations,
    grf_distribution,
    model_from_json,
    model_to_json,
    plain_query_model,
    rm3_distribution,
    to_weighted_query,
)
from .generation import (
    ALL_SUBTASK_NAMES,
    FixtureClient,
    GenerationBundle,
    GenerationParams,
    HttpCompletionClient,
    generate_bundle,
    load_bundle,
    save_bundle,
    subtask_specs,
)
from .index import (
    Document,
    InvertedIndex,
    build_index,
    load_corpus_jsonl,
    load_index,
    save_index,
)
from .retrieval import BM25Params, Ranking, WeightedQuery, parse_plain_query, search
from .textproc import AnalyzerConfig, TermVector, analyze, default_stopwords
from .tuner import (
    FoldSpec,
    Grid,
    TuneResult,
    bm25_grid,
    bm25_harness,
    cross_validate,
    grf_grid,
    grf_harness,
    grid_search,
    make_random_folds,
    rm3_grid,
    rm3_harness,
    transfer_parameters,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_SUBTASK_NAMES",
    "AnalyzerConfig",
    "BM25Params",
    "ConfigError",
    "CorpusError",
    "Document",
    "EvalReport",
    "FeedbackError",
    "FeedbackModel",
    "FixtureClient",
    "FoldSpec",
    "FormatError",
    "GRFParams",
    "GenerationBundle",
    "GenerationError",
    "GenerationParams",
    "Grid",
    "GrfError",
    "HttpCompletionClient",
    "InvertedIndex",
    "Qrels",
    "RM3Params",
    "Ranking",
    "RunFile",
    "TTestResult",
    "TuneResult",
    "WeightedQuery",
    "analyze",
    "average_precision",
    "bm25_grid",
    "bm25_harness",
    "build_index",
    "concat_generations",
    "cross_validate",
    "default_stopwords",
    "evaluate",
    "generate_bundle",
    "grf_distribution",
    "grf_grid",
    "grf_harness",
    "grid_search",
    "load_bundle",
    "load_corpus_jsonl",
    "load_index",
    "make_random_folds",
    "model_from_json",
    "model_to_json",
    "ndcg_at_10",
    "paired_t_test",
    "parse_plain_query",
    "parse_qrels",
    "parse_run",
    "plain_query_model",
    "recall_at_1000",
    "rm3_distribution",
    "rm3_grid",
    "rm3_harness",
    "save_bundle",
    "save_index",
    "search",
    "subtask_specs",
    "to_weighted_query",
    "transfer_parameters",
    "write_run",
]
