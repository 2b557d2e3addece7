"""TREC-style evaluation: run/qrels IO, NDCG@10, MAP, Recall@1000, and a
paired two-tailed t-test with an internally computed t-distribution CDF.

Conventions follow the common evaluation tooling: gains are 2^rel - 1 with
a log2(rank+1) discount, MAP/Recall binarize at a configurable grade
threshold (default >= 1), queries without a positive judgment are excluded
from MAP/Recall means but count as 0 for NDCG when judged.
"""

import logging
import math
from dataclasses import dataclass, field

from .errors import ConfigError, FormatError, GrfError
from .retrieval import Ranking

__all__ = [
    "Qrels",
    "RunFile",
    "EvalReport",
    "TTestResult",
    "parse_qrels",
    "parse_run",
    "write_run",
    "ndcg_at_10",
    "average_precision",
    "recall_at_1000",
    "evaluate",
    "paired_t_test",
    "student_t_two_tailed_p",
]

log = logging.getLogger(__name__)


@dataclass
class Qrels:
    """Graded judgments keyed by (query_id, doc_id)."""

    judgments: dict[tuple[str, str], int]

    def __post_init__(self):
        for (qid, doc_id), grade in self.judgments.items():
            if grade < 0:
                raise FormatError(
                    f"negative relevance grade {grade} for ({qid}, {doc_id})"
                )

    def queries(self) -> list[str]:
        return sorted({qid for qid, _ in self.judgments})

    def for_query(self, qid: str) -> dict[str, int]:
        return {
            doc_id: grade
            for (q, doc_id), grade in self.judgments.items()
            if q == qid
        }

    def relevant_docs(self, qid: str, threshold: int = 1) -> set[str]:
        return {
            doc_id
            for (q, doc_id), grade in self.judgments.items()
            if q == qid and grade >= threshold
        }


@dataclass
class RunFile:
    rankings: dict[str, Ranking]
    tag: str = "run"


@dataclass
class EvalReport:
    """Per-query metrics plus arithmetic means. A query with no positive
    judgment carries None for map/r1000 and is skipped in those means."""

    per_query: dict[str, dict[str, float | None]]
    means: dict[str, float]
    num_queries: int
    no_positive_queries: list[str] = field(default_factory=list)


@dataclass
class TTestResult:
    t: float
    p: float
    significant_at_95: bool


def parse_qrels(path) -> Qrels:
    """TREC 4-column qrels: ``qid 0 docid grade``."""
    judgments: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(
                    f"{path}:{lineno}: expected 4 columns, got {len(parts)}"
                )
            qid, _, doc_id, grade_str = parts
            try:
                grade = int(grade_str)
            except ValueError as exc:
                raise FormatError(
                    f"{path}:{lineno}: relevance grade {grade_str!r} is not an integer"
                ) from exc
            if grade < 0:
                raise FormatError(f"{path}:{lineno}: negative grade {grade}")
            if (qid, doc_id) in judgments:
                raise FormatError(
                    f"{path}:{lineno}: duplicate judgment for ({qid}, {doc_id})"
                )
            judgments[(qid, doc_id)] = grade
    return Qrels(judgments=judgments)


def parse_run(path, max_depth: int = 1000) -> RunFile:
    """TREC 6-column run: ``qid Q0 docid rank score tag``. Scores are
    authoritative: entries are reordered by (score desc, docid asc) and a
    warning is logged when that disagrees with the written ranks."""
    per_query: dict[str, list[tuple[str, float]]] = {}
    seen: set[tuple[str, str]] = set()
    tag = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise FormatError(
                    f"{path}:{lineno}: expected 6 columns, got {len(parts)}"
                )
            qid, _, doc_id, _rank, score_str, line_tag = parts
            try:
                score = float(score_str)
            except ValueError as exc:
                raise FormatError(
                    f"{path}:{lineno}: score {score_str!r} is not a number"
                ) from exc
            if (qid, doc_id) in seen:
                raise FormatError(
                    f"{path}:{lineno}: duplicate document {doc_id!r} for query {qid!r}"
                )
            seen.add((qid, doc_id))
            if tag is None:
                tag = line_tag
            per_query.setdefault(qid, []).append((doc_id, score))
    rankings = {}
    for qid, entries in per_query.items():
        if len(entries) > max_depth:
            raise FormatError(
                f"{path}: query {qid!r} has {len(entries)} entries, more than depth {max_depth}"
            )
        reordered = sorted(entries, key=lambda pair: (-pair[1], pair[0]))
        if [d for d, _ in reordered] != [d for d, _ in entries]:
            log.warning(
                "run %s query %s: written ranks disagree with scores; scores win",
                path,
                qid,
            )
        rankings[qid] = Ranking(query_id=qid, entries=reordered)
    return RunFile(rankings=rankings, tag=tag if tag is not None else "run")


def write_run(path, run: RunFile) -> None:
    """Scores are written with repr, the shortest form that parses back to
    the identical float (never losing precision)."""
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(run.rankings):
            for rank, (doc_id, score) in enumerate(run.rankings[qid].entries, start=1):
                fh.write(f"{qid} Q0 {doc_id} {rank} {float(score)!r} {run.tag}\n")


def _dcg(grades: list[int]) -> float:
    return math.fsum(
        (2.0 ** g - 1.0) / math.log2(i + 2) for i, g in enumerate(grades)
    )


def ndcg_at_10(ranking: Ranking, qrels_for_query: dict[str, int]) -> float:
    """0.0 when nothing judged positive (ideal gain is zero)."""
    gains = [qrels_for_query.get(doc_id, 0) for doc_id in ranking.doc_ids()[:10]]
    ideal = sorted(qrels_for_query.values(), reverse=True)[:10]
    idcg = _dcg(ideal)
    if idcg <= 0.0:
        return 0.0
    return _dcg(gains) / idcg


def average_precision(
    ranking: Ranking,
    qrels_for_query: dict[str, int],
    depth: int = 1000,
    threshold: int = 1,
) -> float | None:
    """None when the query has no relevant document (excluded upstream)."""
    relevant = {d for d, g in qrels_for_query.items() if g >= threshold}
    if not relevant:
        return None
    hits = 0
    precision_sum = 0.0
    for rank, doc_id in enumerate(ranking.doc_ids()[:depth], start=1):
        if doc_id in relevant:
            hits += 1
            precision_sum += hits / rank
    return precision_sum / len(relevant)


def recall_at_1000(
    ranking: Ranking,
    qrels_for_query: dict[str, int],
    depth: int = 1000,
    threshold: int = 1,
) -> float | None:
    relevant = {d for d, g in qrels_for_query.items() if g >= threshold}
    if not relevant:
        return None
    retrieved = set(ranking.doc_ids()[:depth]) & relevant
    return len(retrieved) / len(relevant)


def evaluate(run: RunFile, qrels: Qrels, ap_threshold: int = 1, depth: int = 1000) -> EvalReport:
    """Score every judged query; judged queries missing from the run get
    zeros (empty ranking)."""
    queries = qrels.queries()
    if not queries:
        raise ConfigError("qrels contain no judgments")
    if not set(queries) & set(run.rankings):
        raise ConfigError("run and qrels share no queries")
    per_query: dict[str, dict[str, float | None]] = {}
    no_positive = []
    for qid in queries:
        ranking = run.rankings.get(qid, Ranking(query_id=qid, entries=[]))
        judged = qrels.for_query(qid)
        row = {
            "ndcg10": ndcg_at_10(ranking, judged),
            "map": average_precision(ranking, judged, depth=depth, threshold=ap_threshold),
            "r1000": recall_at_1000(ranking, judged, depth=depth, threshold=ap_threshold),
        }
        if row["map"] is None:
            no_positive.append(qid)
        per_query[qid] = row
    means = {}
    for metric in ("ndcg10", "map", "r1000"):
        values = [row[metric] for row in per_query.values() if row[metric] is not None]
        means[metric] = math.fsum(values) / len(values) if values else 0.0
    return EvalReport(
        per_query=per_query,
        means=means,
        num_queries=len(queries),
        no_positive_queries=no_positive,
    )


# --- paired t-test ---------------------------------------------------------

_BETA_EPS = 3e-14
_BETA_FPMIN = 1e-300
_BETA_MAXIT = 300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_FPMIN:
        d = _BETA_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            break
    return h


def _betai(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, df: int) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if df < 1:
        raise ConfigError(f"degrees of freedom must be >= 1, got {df}")
    if math.isinf(t):
        return 0.0
    return min(1.0, _betai(df / 2.0, 0.5, df / (df + t * t)))


def paired_t_test(per_query_a, per_query_b) -> TTestResult:
    """Two-tailed paired t-test on per-query differences a - b.

    Inputs are either aligned mappings query_id -> value or equal-length
    sequences. All-zero differences give t=0, p=1 (comparing a run against
    itself is legitimate, not an error); zero spread around a nonzero mean
    gives t = +/-inf, p=0.
    """
    if isinstance(per_query_a, dict) or isinstance(per_query_b, dict):
        if set(per_query_a) != set(per_query_b):
            raise ConfigError("paired t-test requires aligned query sets")
        keys = sorted(per_query_a)
        a = [per_query_a[k] for k in keys]
        b = [per_query_b[k] for k in keys]
    else:
        a = list(per_query_a)
        b = list(per_query_b)
        if len(a) != len(b):
            raise ConfigError("paired t-test requires aligned value lists")
    n = len(a)
    if n < 2:
        raise GrfError("insufficient queries for a paired t-test (need >= 2)")
    diffs = [x - y for x, y in zip(a, b)]
    mean = math.fsum(diffs) / n
    variance = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    if variance == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, p=1.0, significant_at_95=False)
        t = math.inf if mean > 0 else -math.inf
        return TTestResult(t=t, p=0.0, significant_at_95=True)
    t = mean / math.sqrt(variance / n)
    p = student_t_two_tailed_p(t, n - 1)
    return TTestResult(t=t, p=p, significant_at_95=p < 0.05)
