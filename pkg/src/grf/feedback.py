"""Feedback term distributions and the weighted queries they induce.

Two routes produce a FeedbackModel:

* rm3_distribution mixes the query model with a relevance model estimated
  from top-ranked first-pass documents (pseudo-relevance feedback).
* grf_distribution mixes the query model with the term distribution of
  generated text, gated to the theta most probable generated terms. It
  never sees the index or the first-pass ranking, so a weak first pass
  cannot contaminate it.

Both final distributions are renormalized after truncation: ranking is
invariant to positive scaling of query weights, and an exact sum-to-1
makes the models directly comparable and testable.
"""

import math
from dataclasses import dataclass, field

from .errors import ConfigError, FeedbackError
from .generation import ALL_SUBTASK_NAMES, GenerationBundle
from .index import InvertedIndex
from .retrieval import Ranking, WeightedQuery
from .textproc import AnalyzerConfig, TermVector, analyze, to_term_vector

__all__ = [
    "FeedbackModel",
    "GRFParams",
    "RM3Params",
    "estimate_mle",
    "plain_query_model",
    "grf_distribution",
    "rm3_distribution",
    "to_weighted_query",
    "concat_generations",
    "model_to_json",
    "model_from_json",
]

_SUM_TOLERANCE = 1e-9


def _valid_origin(origin: str) -> bool:
    if origin in ("rm3", "grf"):
        return True
    if origin.startswith("grf_subtask:"):
        return origin.split(":", 1)[1] in ALL_SUBTASK_NAMES
    return False


@dataclass
class FeedbackModel:
    """Term distribution over analyzed terms; sums to 1 within 1e-9."""

    weights: dict[str, float]
    origin: str
    params_used: dict = field(default_factory=dict)

    def __post_init__(self):
        if not _valid_origin(self.origin):
            raise ConfigError(f"unknown feedback origin {self.origin!r}")
        if not self.weights:
            raise FeedbackError("feedback model has no terms")
        for term, weight in self.weights.items():
            if not 0.0 < weight <= 1.0:
                raise FeedbackError(
                    f"feedback weight for {term!r} outside (0, 1]: {weight}"
                )
        total = math.fsum(self.weights.values())
        if abs(total - 1.0) > _SUM_TOLERANCE:
            raise FeedbackError(f"feedback weights sum to {total!r}, expected 1")


@dataclass(frozen=True)
class GRFParams:
    """beta: original-query interpolation weight; theta: number of
    generated expansion terms admitted."""

    beta: float = 0.5
    theta: int = 50

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}")
        if self.theta < 1:
            raise ConfigError(f"theta must be >= 1, got {self.theta}")


@dataclass(frozen=True)
class RM3Params:
    fb_docs: int = 10
    fb_terms: int = 10
    original_query_weight: float = 0.5

    def __post_init__(self):
        if self.fb_docs < 1:
            raise ConfigError(f"fb_docs must be >= 1, got {self.fb_docs}")
        if self.fb_terms < 1:
            raise ConfigError(f"fb_terms must be >= 1, got {self.fb_terms}")
        if not 0.0 <= self.original_query_weight <= 1.0:
            raise ConfigError(
                f"original_query_weight must be in [0, 1], got {self.original_query_weight}"
            )


def _renormalize(raw: dict[str, float]) -> dict[str, float]:
    """Drop zero-weight terms and rescale the rest to sum to 1, iterating
    in sorted term order so the arithmetic is reproducible."""
    kept = {t: raw[t] for t in sorted(raw) if raw[t] != 0.0}
    total = math.fsum(kept.values())
    if total <= 0.0:
        raise FeedbackError("feedback distribution has no mass")
    return {t: w / total for t, w in kept.items()}


def estimate_mle(doc: TermVector) -> dict[str, float]:
    """Maximum-likelihood term distribution of one term vector."""
    if doc.total < 1:
        raise FeedbackError("empty feedback text")
    return {t: count / doc.total for t, count in sorted(doc.counts.items())}


def plain_query_model(
    query: WeightedQuery, origin: str = "grf", params_used: dict | None = None
) -> FeedbackModel:
    """The query's own term distribution as a FeedbackModel."""
    return FeedbackModel(
        weights=_renormalize(dict(query.weights)),
        origin=origin,
        params_used=params_used if params_used is not None else {},
    )


def top_terms(distribution: dict[str, float], k: int) -> list[str]:
    """The k highest-probability terms, ties broken lexicographically."""
    ranked = sorted(distribution.items(), key=lambda item: (-item[1], item[0]))
    return [t for t, _ in ranked[:k]]


def grf_distribution(
    query: WeightedQuery,
    d_llm: TermVector,
    params: GRFParams,
    origin: str = "grf",
) -> FeedbackModel:
    """Interpolate the query model with the generated-text model.

    Only terms among the theta most probable generated terms receive
    generative mass; query terms outside that set keep their beta-weighted
    query mass. Pure in (query, d_llm, params): no index, no first pass.
    """
    beta = params.beta
    if d_llm.total < 1:
        if beta < 1.0:
            raise FeedbackError("empty feedback text")
        generated = {}
    else:
        generated = estimate_mle(d_llm)
    admitted = set(top_terms(generated, params.theta))
    raw = {}
    for term in sorted(set(query.weights) | admitted):
        generative = generated[term] if term in admitted else 0.0
        raw[term] = beta * query.weights.get(term, 0.0) + (1.0 - beta) * generative
    return FeedbackModel(
        weights=_renormalize(raw),
        origin=origin,
        params_used={"beta": beta, "theta": params.theta},
    )


def rm3_distribution(
    query: WeightedQuery,
    first_pass: Ranking,
    index: InvertedIndex,
    params: RM3Params,
) -> FeedbackModel:
    """Relevance model from the top-ranked documents, interpolated with
    the query model. Document weights P(d|Q) are the normalized first-pass
    scores; P(w|d) is unsmoothed maximum likelihood."""
    params_used = {
        "fb_docs": params.fb_docs,
        "fb_terms": params.fb_terms,
        "original_query_weight": params.original_query_weight,
        "p_w_d": "mle",
        "p_d_q": "normalized-scores",
    }
    if not first_pass.entries:
        return plain_query_model(
            query, origin="rm3", params_used={**params_used, "empty_first_pass": True}
        )
    feedback_set = first_pass.entries[: params.fb_docs]
    denom = math.fsum(score for _, score in feedback_set)
    rm1: dict[str, float] = {}
    ordinals = {doc_id: i for i, doc_id in enumerate(index.doc_ids)}
    for doc_id, score in feedback_set:
        vec = index.vector_for(ordinals[doc_id])
        if vec.total == 0:
            continue
        p_d_q = score / denom
        for term, count in vec.counts.items():
            rm1[term] = rm1.get(term, 0.0) + (count / vec.total) * p_d_q
    truncated = _renormalize(
        {t: rm1[t] for t in top_terms(rm1, params.fb_terms)}
    ) if rm1 else {}
    w0 = params.original_query_weight
    raw = {}
    for term in sorted(set(query.weights) | set(truncated)):
        raw[term] = w0 * query.weights.get(term, 0.0) + (1.0 - w0) * truncated.get(term, 0.0)
    return FeedbackModel(weights=_renormalize(raw), origin="rm3", params_used=params_used)


def to_weighted_query(model: FeedbackModel) -> WeightedQuery:
    """Weights copied verbatim; source derived from the model origin."""
    source = "rm3" if model.origin == "rm3" else "grf"
    return WeightedQuery(weights=dict(model.weights), source=source)


def concat_generations(
    bundle: GenerationBundle,
    subtasks=None,
    analyzer: AnalyzerConfig | None = None,
) -> TermVector:
    """Term vector of the concatenated subtask texts, analyzed with the
    same pipeline as documents. Order-independent by construction."""
    if subtasks is None:
        subtasks = ALL_SUBTASK_NAMES
    missing = [s for s in subtasks if s not in bundle.generations]
    if missing:
        raise FeedbackError(
            f"bundle for query {bundle.query_id!r} missing subtask(s): {', '.join(missing)}"
        )
    ordered = [s for s in ALL_SUBTASK_NAMES if s in set(subtasks)]
    text = "\n".join(bundle.generations[s] for s in ordered)
    return to_term_vector(analyze(text, analyzer))


def model_to_json(model: FeedbackModel, query_id: str = "") -> dict:
    return {
        "query_id": query_id,
        "origin": model.origin,
        "params_used": model.params_used,
        "weights": model.weights,
    }


def model_from_json(payload: dict) -> FeedbackModel:
    try:
        return FeedbackModel(
            weights=dict(payload["weights"]),
            origin=payload["origin"],
            params_used=payload.get("params_used", {}),
        )
    except KeyError as exc:
        raise FeedbackError(f"feedback model JSON missing field {exc}") from exc
