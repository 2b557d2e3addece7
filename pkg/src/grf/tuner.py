"""Grid-search tuning with k-fold cross-validation.

A Grid is a set of named axes; points are visited in cartesian order with
axes iterated in declaration order, and ties on the objective go to the
earlier point. cross_validate tunes on each fold's train split, applies the
winner to the test split, and also reports transfer parameters: the
per-axis mean of the fold winners snapped to the nearest grid value, for
reuse on collections that were never tuned on.
"""

import itertools
import json
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable

from .errors import ConfigError, FormatError, GrfError
from .evaluation import (
    Qrels,
    RunFile,
    average_precision,
    ndcg_at_10,
    recall_at_1000,
)
from .feedback import (
    GRFParams,
    RM3Params,
    concat_generations,
    grf_distribution,
    rm3_distribution,
    to_weighted_query,
)
from .retrieval import BM25Params, Ranking, parse_plain_query, search

__all__ = [
    "OBJECTIVES",
    "Grid",
    "FoldSpec",
    "TuneResult",
    "TuningHarness",
    "bm25_grid",
    "rm3_grid",
    "grf_grid",
    "grid_search",
    "cross_validate",
    "transfer_parameters",
    "make_random_folds",
    "load_folds",
    "save_folds",
    "bm25_harness",
    "rm3_harness",
    "grf_harness",
]

log = logging.getLogger(__name__)

OBJECTIVES = ("r1000", "map", "ndcg10")


@dataclass
class Grid:
    """Named parameter axes; declaration order fixes iteration order."""

    axes: dict[str, list]

    def __post_init__(self):
        if not self.axes:
            raise ConfigError("grid needs at least one axis")
        for name, values in self.axes.items():
            if not values:
                raise ConfigError(f"grid axis {name!r} has no values")

    @property
    def size(self) -> int:
        return math.prod(len(values) for values in self.axes.values())

    def points(self):
        names = list(self.axes)
        for combo in itertools.product(*self.axes.values()):
            yield dict(zip(names, combo))


def _frange(start: float, stop: float, step: float) -> list[float]:
    # rounding keeps the values clean (0.3, not 0.30000000000000004)
    count = int((stop - start) / step + 1e-6) + 1
    return [round(start + i * step, 10) for i in range(count)]


def bm25_grid() -> Grid:
    return Grid(axes={"k1": _frange(0.1, 5.0, 0.2), "b": _frange(0.1, 1.0, 0.1)})


def rm3_grid() -> Grid:
    return Grid(
        axes={
            "fb_terms": list(range(5, 100, 5)),
            "fb_docs": list(range(5, 55, 5)),
            "original_query_weight": _frange(0.2, 0.8, 0.1),
        }
    )


def grf_grid() -> Grid:
    # the generative expansion ranges are this package's defaults, not an
    # established convention; reports label them as such
    return Grid(axes={"theta": list(range(10, 110, 10)), "beta": _frange(0.1, 0.9, 0.1)})


@dataclass
class FoldSpec:
    """Train/test query splits. Test sets are disjoint across folds and
    train never overlaps test, except the degenerate single fold with
    train == test, which reduces cross-validation to plain grid search."""

    folds: list[tuple[list[str], list[str]]]

    def __post_init__(self):
        if not self.folds:
            raise ConfigError("fold spec has no folds")
        degenerate = (
            len(self.folds) == 1
            and set(self.folds[0][0]) == set(self.folds[0][1])
        )
        seen_test: set[str] = set()
        for i, (train, test) in enumerate(self.folds):
            if not train or not test:
                raise ConfigError(f"fold {i}: empty train or test split")
            overlap = set(train) & set(test)
            if overlap and not degenerate:
                raise ConfigError(
                    f"fold {i}: train and test share queries: {sorted(overlap)[:5]}"
                )
            duplicates = seen_test & set(test)
            if duplicates:
                raise ConfigError(
                    f"fold {i}: test queries already used: {sorted(duplicates)[:5]}"
                )
            seen_test |= set(test)

    def test_queries(self) -> list[str]:
        return sorted({qid for _, test in self.folds for qid in test})


@dataclass
class TuneResult:
    per_fold_best: list[dict]
    per_fold_objective: list[float | None]
    merged_test_run: RunFile
    transfer_params: dict


@dataclass
class TuningHarness:
    """Bundles the system under tuning (run_fn: assignment, query ids ->
    rankings) with the judgments needed to score it."""

    run_fn: Callable[[dict, list[str]], dict[str, Ranking]]
    qrels: Qrels
    depth: int = 1000
    ap_threshold: int = 1
    tag: str = "tuned"

    def run(self, assignment: dict, query_ids) -> dict[str, Ranking]:
        return self.run_fn(assignment, list(query_ids))

    def metrics(self, rankings: dict[str, Ranking], query_ids) -> dict[str, dict]:
        out = {}
        for qid in query_ids:
            judged = self.qrels.for_query(qid)
            ranking = rankings.get(qid, Ranking(query_id=qid, entries=[]))
            out[qid] = {
                "ndcg10": ndcg_at_10(ranking, judged),
                "map": average_precision(
                    ranking, judged, depth=self.depth, threshold=self.ap_threshold
                ),
                "r1000": recall_at_1000(
                    ranking, judged, depth=self.depth, threshold=self.ap_threshold
                ),
            }
        return out

    def evaluate(self, assignment: dict, query_ids) -> dict[str, dict]:
        query_ids = list(query_ids)
        return self.metrics(self.run(assignment, query_ids), query_ids)


def _mean_objective(metrics: dict[str, dict], query_ids, objective: str) -> float | None:
    values = [
        metrics[qid][objective]
        for qid in query_ids
        if qid in metrics and metrics[qid][objective] is not None
    ]
    if not values:
        return None
    return math.fsum(values) / len(values)


def grid_search(evaluator, grid: Grid, objective: str, train_queries) -> dict:
    """Exhaustively evaluate every grid point on the train queries and
    return the best assignment. A point whose evaluation raises GrfError is
    skipped with a warning; selection happens only after all points ran, so
    the result does not depend on evaluation order."""
    if objective not in OBJECTIVES:
        raise ConfigError(
            f"unknown objective {objective!r}; expected one of {', '.join(OBJECTIVES)}"
        )
    train_queries = list(train_queries)
    if not train_queries:
        raise ConfigError("grid search needs at least one train query")
    scored: list[tuple[int, dict, float]] = []
    for position, assignment in enumerate(grid.points()):
        try:
            metrics = evaluator(assignment, train_queries)
        except GrfError as exc:
            log.warning("grid point %r skipped: %s", assignment, exc)
            continue
        value = _mean_objective(metrics, train_queries, objective)
        if value is None:
            log.warning("grid point %r yielded no %s values; skipped", assignment, objective)
            continue
        scored.append((position, assignment, value))
    if not scored:
        raise GrfError("every grid point failed evaluation")
    best = max(scored, key=lambda item: (item[2], -item[0]))
    return dict(best[1])


def transfer_parameters(per_fold_best: list[dict], grid: Grid) -> dict:
    """Per-axis mean of the fold winners, snapped to the nearest grid
    value; equidistant means snap toward the smaller value."""
    if not per_fold_best:
        raise ConfigError("no fold results to transfer from")
    out = {}
    for axis, values in grid.axes.items():
        mean = math.fsum(best[axis] for best in per_fold_best) / len(per_fold_best)
        out[axis] = min(values, key=lambda v: (abs(v - mean), v))
    return out


def cross_validate(harness: TuningHarness, grid: Grid, folds: FoldSpec, objective: str) -> TuneResult:
    per_fold_best = []
    per_fold_objective = []
    merged: dict[str, Ranking] = {}
    for train, test in folds.folds:
        best = grid_search(harness.evaluate, grid, objective, train)
        rankings = harness.run(best, test)
        for qid in test:
            merged[qid] = rankings.get(qid, Ranking(query_id=qid, entries=[]))
        per_fold_best.append(best)
        per_fold_objective.append(
            _mean_objective(harness.metrics(rankings, test), test, objective)
        )
    return TuneResult(
        per_fold_best=per_fold_best,
        per_fold_objective=per_fold_objective,
        merged_test_run=RunFile(
            rankings={qid: merged[qid] for qid in sorted(merged)}, tag=harness.tag
        ),
        transfer_params=transfer_parameters(per_fold_best, grid),
    )


# --- fold construction and IO ----------------------------------------------


def make_random_folds(query_ids, k: int = 5, seed: int = 42) -> FoldSpec:
    """Deterministic shuffled round-robin split; k=1 yields the degenerate
    train==test fold."""
    unique = sorted(set(query_ids))
    if k < 1:
        raise ConfigError(f"fold count must be >= 1, got {k}")
    if k > len(unique):
        raise ConfigError(f"cannot make {k} folds from {len(unique)} queries")
    if k == 1:
        return FoldSpec(folds=[(list(unique), list(unique))])
    shuffled = list(unique)
    random.Random(seed).shuffle(shuffled)
    folds = []
    for i in range(k):
        test = sorted(shuffled[i::k])
        train = sorted(set(unique) - set(test))
        folds.append((train, test))
    return FoldSpec(folds=folds)


def load_folds(path) -> FoldSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(payload, dict) or "folds" not in payload:
        raise FormatError(f"{path}: expected an object with a 'folds' list")
    folds = []
    for i, entry in enumerate(payload["folds"]):
        if not isinstance(entry, dict) or "train" not in entry or "test" not in entry:
            raise FormatError(f"{path}: fold {i} needs 'train' and 'test' lists")
        folds.append(
            ([str(q) for q in entry["train"]], [str(q) for q in entry["test"]])
        )
    return FoldSpec(folds=folds)


def save_folds(path, folds: FoldSpec) -> None:
    payload = {
        "folds": [{"train": train, "test": test} for train, test in folds.folds]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# --- harness factories ------------------------------------------------------


def _parsed_topics(topics: dict[str, str], analyzer):
    return {qid: parse_plain_query(text, analyzer) for qid, text in topics.items()}


def _require_topic(queries: dict, qid: str):
    if qid not in queries:
        raise ConfigError(f"no topic text for query {qid!r}")
    return queries[qid]


def bm25_harness(index, topics: dict[str, str], qrels: Qrels, depth: int = 1000) -> TuningHarness:
    """Assignment axes: k1, b."""
    queries = _parsed_topics(topics, index.analyzer)

    def run(assignment, query_ids):
        params = BM25Params(k1=assignment["k1"], b=assignment["b"])
        return {
            qid: search(index, _require_topic(queries, qid), params, depth, qid)
            for qid in query_ids
        }

    return TuningHarness(run_fn=run, qrels=qrels, depth=depth, tag="bm25")


def rm3_harness(
    index,
    topics: dict[str, str],
    qrels: Qrels,
    bm25_params: BM25Params | None = None,
    depth: int = 1000,
) -> TuningHarness:
    """Assignment axes: fb_terms, fb_docs, original_query_weight. The
    first-pass BM25 parameters stay fixed while feedback is tuned, so the
    first pass is computed once per query and reused across the grid."""
    bm25_params = bm25_params if bm25_params is not None else BM25Params()
    queries = _parsed_topics(topics, index.analyzer)
    first_pass: dict[str, Ranking] = {}

    def run(assignment, query_ids):
        params = RM3Params(
            fb_terms=assignment["fb_terms"],
            fb_docs=assignment["fb_docs"],
            original_query_weight=assignment["original_query_weight"],
        )
        out = {}
        for qid in query_ids:
            query = _require_topic(queries, qid)
            if qid not in first_pass:
                first_pass[qid] = search(index, query, bm25_params, depth, qid)
            model = rm3_distribution(query, first_pass[qid], index, params)
            out[qid] = search(index, to_weighted_query(model), bm25_params, depth, qid)
        return out

    return TuningHarness(run_fn=run, qrels=qrels, depth=depth, tag="rm3")


def grf_harness(
    index,
    topics: dict[str, str],
    qrels: Qrels,
    bundles: dict,
    subtasks=None,
    bm25_params: BM25Params | None = None,
    depth: int = 1000,
) -> TuningHarness:
    """Assignment axes: theta, beta. Generated text is analyzed once per
    query; the expansion itself never touches the first pass."""
    bm25_params = bm25_params if bm25_params is not None else BM25Params()
    queries = _parsed_topics(topics, index.analyzer)
    vectors = {
        qid: concat_generations(bundle, subtasks, index.analyzer)
        for qid, bundle in bundles.items()
    }

    def run(assignment, query_ids):
        params = GRFParams(theta=assignment["theta"], beta=assignment["beta"])
        out = {}
        for qid in query_ids:
            query = _require_topic(queries, qid)
            if qid not in vectors:
                raise ConfigError(f"no generation bundle for query {qid!r}")
            model = grf_distribution(query, vectors[qid], params)
            out[qid] = search(index, to_weighted_query(model), bm25_params, depth, qid)
        return out

    return TuningHarness(run_fn=run, qrels=qrels, depth=depth, tag="grf")
