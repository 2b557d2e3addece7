"""Command line interface for batch retrieval experiments.

Subcommands: index, generate, run, eval, tune, hard-topics. Every command
accepts ``--config FILE`` with flat ``key = value`` settings (a TOML-style
subset: quoted strings, numbers, booleans, # comments); explicit flags
override the file. Exit codes: 0 success, 1 internal failure, 2 usage or
configuration error.
"""

import argparse
import concurrent.futures
import json
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigError, FormatError, GenerationError, GrfError
from .evaluation import (
    RunFile,
    evaluate,
    paired_t_test,
    parse_qrels,
    parse_run,
    write_run,
)
from .feedback import (
    GRFParams,
    RM3Params,
    concat_generations,
    grf_distribution,
    model_to_json,
    rm3_distribution,
    to_weighted_query,
)
from .generation import (
    ALL_SUBTASK_NAMES,
    FixtureClient,
    GenerationParams,
    HttpCompletionClient,
    generate_bundle,
    load_bundle,
    subtask_specs,
)
from .index import build_index, load_corpus_jsonl, load_index, save_index
from .report import (
    METRIC_LABELS,
    format_delta_table,
    format_summary_table,
    hard_topic_ids,
    metric_deltas,
    render_delta_figure,
    render_histogram_figure,
    render_means_figure,
    write_delta_tsv,
    write_per_query_tsv,
)
from .retrieval import BM25Params, Ranking, parse_plain_query, search
from .textproc import AnalyzerConfig, default_stopwords, load_stopword_file
from .tuner import (
    OBJECTIVES,
    bm25_grid,
    bm25_harness,
    cross_validate,
    grf_grid,
    grf_harness,
    load_folds,
    make_random_folds,
    rm3_grid,
    rm3_harness,
    save_folds,
)

log = logging.getLogger(__name__)

DEFAULT_SEED = 42
_METRICS = ("ndcg10", "map", "r1000")


# --- configuration plumbing -------------------------------------------------


def read_config_file(path) -> dict:
    """Flat ``key = value`` settings. Strings are double-quoted; bare
    values parse as booleans or numbers. Section headers are rejected:
    keys use the same names as the long command line flags."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            where = f"{path}:{lineno}"
            if line.startswith("["):
                raise ConfigError(f"{where}: sections are not supported; use flat keys")
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or not key:
                raise ConfigError(f"{where}: expected 'key = value'")
            values[key] = _parse_config_value(value.strip(), where)
    return values


def _parse_config_value(value: str, where: str):
    if value.startswith('"'):
        end = value.find('"', 1)
        if end == -1:
            raise ConfigError(f"{where}: unterminated string")
        rest = value[end + 1 :].strip()
        if rest and not rest.startswith("#"):
            raise ConfigError(f"{where}: unexpected text after string")
        return value[1:end]
    value = value.split("#", 1)[0].strip()
    if value in ("true", "false"):
        return value == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    raise ConfigError(f"{where}: cannot parse value {value!r}; quote strings")


class Settings:
    """Flag-over-config-over-default resolution."""

    def __init__(self, args):
        self.args = args
        self.config = read_config_file(args.config) if args.config else {}

    def get(self, name, default=None):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        if name in self.config:
            return self.config[name]
        return default

    def require(self, name):
        value = self.get(name)
        if value is None:
            flag = "--" + name.replace("_", "-")
            raise ConfigError(f"missing required setting {name!r} (flag {flag} or config key)")
        return value

    def path(self, name, must_exist=True):
        value = Path(self.require(name))
        if must_exist and not value.exists():
            raise ConfigError(f"{name} path does not exist: {value}")
        return value


def parse_topics(path) -> dict[str, str]:
    """TSV topics: ``qid<TAB>query text`` per line."""
    topics: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise FormatError(f"{path}:{lineno}: expected 'qid<TAB>query'")
            qid, text = line.split("\t", 1)
            qid = qid.strip()
            if not qid or not text.strip():
                raise FormatError(f"{path}:{lineno}: empty qid or query text")
            if qid in topics:
                raise FormatError(f"{path}:{lineno}: duplicate query id {qid!r}")
            topics[qid] = text.strip()
    return topics


def _atomic_write_text(path, text: str) -> None:
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_write_run(path, run: RunFile) -> None:
    tmp = str(path) + ".tmp"
    write_run(tmp, run)
    os.replace(tmp, path)


def _parallel_map(fn, items, threads: int):
    """Order-preserving map; items are processed concurrently when
    threads > 1 but results are always collected deterministically."""
    items = list(items)
    if threads <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- index ------------------------------------------------------------------


def _analyzer_from(settings: Settings) -> AnalyzerConfig:
    stopwords = settings.get("stopwords", "default")
    if stopwords == "default":
        stopword_list = default_stopwords()
    elif stopwords == "none":
        stopword_list = frozenset()
    else:
        stopword_list = load_stopword_file(stopwords)
    return AnalyzerConfig(
        stopword_list=stopword_list,
        stemmer=settings.get("stemmer", "porter"),
        lowercase=not settings.get("no_lowercase", False),
    )


def cmd_index(args) -> int:
    settings = Settings(args)
    corpus_path = settings.path("corpus")
    output = settings.require("output")
    analyzer = _analyzer_from(settings)
    index = build_index(
        load_corpus_jsonl(corpus_path),
        analyzer=analyzer,
        store_vectors=not settings.get("no_vectors", False),
    )
    tmp = str(output) + ".tmp"
    save_index(index, tmp)
    os.replace(tmp, output)
    print(f"indexed {index.num_docs} documents from {corpus_path}")
    print(f"  vocabulary: {len(index.postings)} terms")
    print(f"  avg doc length: {index.avg_doc_length:.2f}")
    print(
        f"  analyzer: stemmer={analyzer.stemmer} "
        f"stopwords={len(analyzer.stopword_list)} lowercase={analyzer.lowercase}"
    )
    print(f"wrote {output}")
    return 0


# --- generate ---------------------------------------------------------------


def cmd_generate(args) -> int:
    settings = Settings(args)
    topics = parse_topics(settings.path("topics"))
    out_dir = Path(settings.require("output_dir"))
    out_dir.mkdir(parents=True, exist_ok=True)

    fixtures = settings.get("fixtures")
    if fixtures is not None:
        client = FixtureClient(fixtures)
    else:
        endpoint = settings.get("endpoint")
        if endpoint is None:
            raise ConfigError("generation needs --fixtures DIR or --endpoint URL")
        client = HttpCompletionClient(endpoint)

    subtasks = settings.get("subtasks")
    names = [s.strip() for s in subtasks.split(",")] if subtasks else None
    specs = subtask_specs(names)
    params = GenerationParams(
        temperature=settings.get("temperature", 0.7),
        top_p=settings.get("top_p", 1.0),
        model_id=settings.get("model", ""),
    )

    def one(qid):
        return qid, generate_bundle(client, qid, topics[qid], specs, params, out_dir)

    results = _parallel_map(one, sorted(topics), int(settings.get("threads", 1)))
    failed_queries = []
    for qid, bundle in results:
        status = f"{qid}: {len(bundle.generations)} subtasks"
        if bundle.failed:
            status += f", {len(bundle.failed)} failed ({', '.join(sorted(bundle.failed))})"
            failed_queries.append(qid)
        if bundle.warnings:
            status += f", {len(bundle.warnings)} empty"
        print(status)
    print(f"bundles in {out_dir} ({len(results)} queries, source {client.source})")
    if failed_queries and settings.get("strict", False):
        raise GenerationError(
            f"subtask failures for queries: {', '.join(failed_queries)}"
        )
    return 0


# --- run --------------------------------------------------------------------


def _method_subtasks(method: str):
    """Returns (canonical method, subtask subset or None for all)."""
    if method in ("bm25", "rm3", "grf"):
        return method, None
    if method.startswith("grf_subtask:"):
        name = method.split(":", 1)[1]
        if name not in ALL_SUBTASK_NAMES:
            raise ConfigError(
                f"unknown subtask {name!r}; valid: {', '.join(ALL_SUBTASK_NAMES)}"
            )
        return "grf_subtask", [name]
    raise ConfigError(
        f"unknown method {method!r}; expected bm25, rm3, grf, or grf_subtask:<name>"
    )


def cmd_run(args) -> int:
    settings = Settings(args)
    index = load_index(settings.path("index"))
    topics = parse_topics(settings.path("topics"))
    output = settings.require("output")
    method = settings.require("method")
    kind, subtasks = _method_subtasks(method)
    depth = int(settings.get("depth", 1000))
    strict = bool(settings.get("strict", False))
    bm25 = BM25Params(k1=float(settings.get("k1", 0.9)), b=float(settings.get("b", 0.4)))

    bundles = {}
    skipped = []
    if kind in ("grf", "grf_subtask"):
        gen_dir = settings.path("generations")
        for qid in sorted(topics):
            bundle_path = gen_dir / f"{qid}.json"
            if bundle_path.exists():
                bundles[qid] = load_bundle(bundle_path)
            elif strict:
                raise ConfigError(f"no generation bundle for query {qid!r} in {gen_dir}")
            else:
                skipped.append(qid)

    rm3_params = RM3Params(
        fb_terms=int(settings.get("fb_terms", 10)),
        fb_docs=int(settings.get("fb_docs", 10)),
        original_query_weight=float(settings.get("fb_weight", 0.5)),
    )
    grf_params = GRFParams(
        beta=float(settings.get("beta", 0.5)), theta=int(settings.get("theta", 50))
    )

    def one(qid):
        query = parse_plain_query(topics[qid], index.analyzer)
        if not query.weights:
            log.warning("query %s has no terms after analysis", qid)
            return qid, Ranking(query_id=qid, entries=[], empty_query=True), None
        if kind == "bm25":
            return qid, search(index, query, bm25, depth, qid), None
        if kind == "rm3":
            first = search(index, query, bm25, depth, qid)
            model = rm3_distribution(query, first, index, rm3_params)
        else:
            vector = concat_generations(bundles[qid], subtasks, index.analyzer)
            origin = "grf" if subtasks is None else f"grf_subtask:{subtasks[0]}"
            model = grf_distribution(query, vector, grf_params, origin=origin)
        ranking = search(index, to_weighted_query(model), bm25, depth, qid)
        return qid, ranking, model

    query_ids = [q for q in sorted(topics) if q not in skipped]
    results = _parallel_map(one, query_ids, int(settings.get("threads", 1)))
    rankings = {qid: ranking for qid, ranking, _ in results}
    _atomic_write_run(output, RunFile(rankings=rankings, tag=method))

    dump = settings.get("dump_models")
    if dump is not None:
        models = {qid: model for qid, _, model in results if model is not None}
        if not models:
            raise ConfigError("--dump-models needs a feedback method (rm3 or grf)")
        payload = {qid: model_to_json(models[qid], qid) for qid in sorted(models)}
        _atomic_write_text(dump, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {len(payload)} feedback models to {dump}")

    print(f"# method={method} depth={depth} k1={bm25.k1} b={bm25.b}")
    print(f"ran {len(query_ids)} queries -> {output} (tag {method})")
    if skipped:
        print(f"skipped {len(skipped)} queries without bundles: {', '.join(skipped)}")
    return 0


# --- eval -------------------------------------------------------------------


def _significance(report_run, report_base):
    """Per-metric paired t-tests over queries scored on both sides."""
    out = {}
    for metric in _METRICS:
        a = {q: row[metric] for q, row in report_run.per_query.items() if row[metric] is not None}
        b = {q: row[metric] for q, row in report_base.per_query.items() if row[metric] is not None}
        shared = set(a) & set(b)
        if len(shared) < 2:
            out[metric] = None
            continue
        out[metric] = paired_t_test(
            {q: a[q] for q in shared}, {q: b[q] for q in shared}
        )
    return out


def _labels(run: RunFile, baseline: RunFile):
    if run.tag != baseline.tag:
        return run.tag, baseline.tag
    return run.tag, baseline.tag + "-baseline"


def cmd_eval(args) -> int:
    settings = Settings(args)
    run = parse_run(settings.path("run"))
    qrels = parse_qrels(settings.path("qrels"))
    threshold = int(settings.get("ap_threshold", 1))
    report = evaluate(run, qrels, ap_threshold=threshold)

    baseline_path = settings.get("baseline")
    payload = {"runs": {}, "significance": None}
    if baseline_path is None:
        rows = [(run.tag, report)]
        improved = {}
        tests = None
    else:
        baseline_run = parse_run(Path(baseline_path))
        base_report = evaluate(baseline_run, qrels, ap_threshold=threshold)
        run_label, base_label = _labels(run, baseline_run)
        tests = _significance(report, base_report)
        improved = {
            run_label: {
                m
                for m, result in tests.items()
                if result is not None and result.significant_at_95 and result.t > 0
            }
        }
        rows = [(base_label, base_report), (run_label, report)]
        payload["significance"] = {
            m: None
            if result is None
            else {
                "t": result.t,
                "p": result.p,
                "significant_at_95": result.significant_at_95,
                "improved": result.significant_at_95 and result.t > 0,
            }
            for m, result in tests.items()
        }
    for label, rep in rows:
        payload["runs"][label] = {
            "means": rep.means,
            "num_queries": rep.num_queries,
            "no_positive_queries": rep.no_positive_queries,
        }

    if settings.get("json_out", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(format_summary_table(rows, improved))
        if tests is not None:
            print(f"\nsignificance vs {rows[0][0]} (paired t-test, 95%):")
            for metric in _METRICS:
                result = tests[metric]
                if result is None:
                    print(f"  {METRIC_LABELS[metric]}: not enough paired queries")
                    continue
                mark = " +" if metric in improved.get(rows[1][0], ()) else ""
                print(
                    f"  {METRIC_LABELS[metric]}: t={result.t:.4f} p={result.p:.4f}{mark}"
                )

    report_dir = settings.get("report_dir")
    if report_dir is not None:
        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        for label, rep in rows:
            write_per_query_tsv(out / f"per_query_{label}.tsv", rep)
            render_histogram_figure(out / f"ndcg10_hist_{label}.png", rep)
        render_means_figure(out / "means.png", rows)
        _atomic_write_text(
            out / "summary.json", json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )
        print(f"report written to {out}")
    return 0


# --- tune -------------------------------------------------------------------


def cmd_tune(args) -> int:
    settings = Settings(args)
    method = settings.require("method")
    if method not in ("bm25", "rm3", "grf"):
        raise ConfigError(f"tune supports bm25, rm3, grf; got {method!r}")
    index = load_index(settings.path("index"))
    topics = parse_topics(settings.path("topics"))
    qrels = parse_qrels(settings.path("qrels"))
    depth = int(settings.get("depth", 1000))
    objective = settings.get("objective", "r1000")
    seed = int(settings.get("seed", DEFAULT_SEED))

    judged = sorted(set(topics) & set(qrels.queries()))
    if not judged:
        raise ConfigError("no topics have judgments; nothing to tune on")
    dropped = sorted(set(topics) - set(judged))
    if dropped:
        log.warning("ignoring %d topics without judgments: %s", len(dropped), ", ".join(dropped))

    folds_path = settings.get("folds")
    if folds_path is not None:
        folds = load_folds(Path(folds_path))
    else:
        folds = make_random_folds(judged, k=int(settings.get("auto_folds", 5)), seed=seed)
    save_folds_path = settings.get("save_folds")
    if save_folds_path is not None:
        save_folds(save_folds_path, folds)

    bm25 = BM25Params(k1=float(settings.get("k1", 0.9)), b=float(settings.get("b", 0.4)))
    if method == "bm25":
        harness, grid = bm25_harness(index, topics, qrels, depth), bm25_grid()
    elif method == "rm3":
        harness, grid = rm3_harness(index, topics, qrels, bm25, depth), rm3_grid()
    else:
        gen_dir = settings.path("generations")
        bundles = {}
        for qid in folds.test_queries():
            bundle_path = gen_dir / f"{qid}.json"
            if not bundle_path.exists():
                raise ConfigError(f"no generation bundle for query {qid!r} in {gen_dir}")
            bundles[qid] = load_bundle(bundle_path)
        harness = grf_harness(index, topics, qrels, bundles, None, bm25, depth)
        grid = grf_grid()

    result = cross_validate(harness, grid, folds, objective)

    print(
        f"# tune method={method} objective={objective} seed={seed} "
        f"folds={len(folds.folds)} grid={grid.size} points"
    )
    if method == "grf":
        print("# theta/beta ranges are package defaults, not an established convention")
    for i, (best, value) in enumerate(zip(result.per_fold_best, result.per_fold_objective)):
        shown = "NA" if value is None else f"{value:.4f}"
        print(f"fold {i}: {json.dumps(best, sort_keys=True)} -> {objective}={shown}")
    print(f"transfer params: {json.dumps(result.transfer_params, sort_keys=True)}")

    run_output = settings.get("run_output")
    if run_output is not None:
        _atomic_write_run(run_output, result.merged_test_run)
        print(f"merged test run -> {run_output}")
    output = settings.get("output")
    if output is not None:
        payload = {
            "method": method,
            "objective": objective,
            "seed": seed,
            "per_fold_best": result.per_fold_best,
            "per_fold_objective": result.per_fold_objective,
            "transfer_params": result.transfer_params,
        }
        _atomic_write_text(output, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"tuning result -> {output}")
    return 0


# --- hard topics ------------------------------------------------------------


def cmd_hard_topics(args) -> int:
    settings = Settings(args)
    run_a = parse_run(settings.path("run_a"))
    run_b = parse_run(settings.path("run_b"))
    qrels = parse_qrels(settings.path("qrels"))
    fraction = float(settings.get("fraction", 0.2))
    threshold = int(settings.get("ap_threshold", 1))

    shared = set(run_a.rankings) & set(run_b.rankings) & set(qrels.queries())
    if len(shared) < 5:
        raise ConfigError(
            f"hard-topics needs >= 5 queries shared by both runs and the qrels, got {len(shared)}"
        )
    report_a = evaluate(run_a, qrels, ap_threshold=threshold)
    report_b = evaluate(run_b, qrels, ap_threshold=threshold)
    hard = hard_topic_ids(report_a, fraction)
    deltas = metric_deltas(report_a, report_b, hard)

    label_a = run_a.tag if run_a.tag != run_b.tag else run_a.tag + "-a"
    label_b = run_b.tag if run_a.tag != run_b.tag else run_b.tag + "-b"
    if settings.get("json_out", False):
        payload = {
            "fraction": fraction,
            "baseline": label_a,
            "comparison": label_b,
            "hard_queries": hard,
            "deltas": deltas,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(
            f"hardest {len(hard)} of {report_a.num_queries} queries by "
            f"{label_a} NDCG@10 (fraction {fraction})"
        )
        print(f"deltas are {label_b} - {label_a}:\n")
        print(format_delta_table(deltas))

    report_dir = settings.get("report_dir")
    if report_dir is not None:
        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_delta_tsv(out / "hard_topic_deltas.tsv", deltas)
        render_delta_figure(out / "hard_topic_deltas.png", deltas)
        render_means_figure(out / "means.png", [(label_a, report_a), (label_b, report_b)])
        print(f"report written to {out}")
    return 0


# --- parser and entry point -------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="grf", description="Lexical retrieval with generative query expansion."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", parents=[common], help="build and persist an inverted index")
    p.add_argument("--corpus", help="JSONL corpus with id and contents fields")
    p.add_argument("--output", help="index output path (gzipped)")
    p.add_argument("--stopwords", help="'default', 'none', or a stopword file")
    p.add_argument("--stemmer", choices=["porter", "none"])
    p.add_argument("--no-lowercase", action="store_const", const=True, default=None)
    p.add_argument("--no-vectors", action="store_const", const=True, default=None,
                   help="skip per-document term vectors (disables rm3)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("generate", parents=[common], help="produce expansion text bundles")
    p.add_argument("--topics", help="TSV topics file")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--fixtures", help="directory of canned completions (offline)")
    p.add_argument("--endpoint", help="completions HTTP endpoint")
    p.add_argument("--model", help="model name for the endpoint")
    p.add_argument("--subtasks", help="comma-separated subset of subtasks")
    p.add_argument("--temperature", type=float)
    p.add_argument("--top-p", dest="top_p", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--strict", action="store_const", const=True, default=None,
                   help="fail when any subtask fails")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", parents=[common], help="write a TREC run file")
    p.add_argument("--index")
    p.add_argument("--topics")
    p.add_argument("--method", help="bm25 | rm3 | grf | grf_subtask:<name>")
    p.add_argument("--output")
    p.add_argument("--depth", type=int)
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--fb-terms", dest="fb_terms", type=int)
    p.add_argument("--fb-docs", dest="fb_docs", type=int)
    p.add_argument("--fb-weight", dest="fb_weight", type=float,
                   help="original query weight for rm3")
    p.add_argument("--theta", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--generations", help="bundle directory for grf methods")
    p.add_argument("--dump-models", dest="dump_models",
                   help="also write the per-query feedback models as JSON")
    p.add_argument("--threads", type=int)
    p.add_argument("--strict", action="store_const", const=True, default=None,
                   help="abort when a query has no bundle")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", parents=[common], help="score a run against qrels")
    p.add_argument("--run")
    p.add_argument("--qrels")
    p.add_argument("--baseline", help="baseline run for significance testing")
    p.add_argument("--ap-threshold", dest="ap_threshold", type=int,
                   help="min grade counted relevant for MAP/recall")
    p.add_argument("--json", dest="json_out", action="store_const", const=True, default=None)
    p.add_argument("--report-dir", dest="report_dir",
                   help="write TSV tables and PNG figures here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tune", parents=[common], help="cross-validated grid search")
    p.add_argument("--method", help="bm25 | rm3 | grf")
    p.add_argument("--index")
    p.add_argument("--topics")
    p.add_argument("--qrels")
    p.add_argument("--folds", help="JSON fold file")
    p.add_argument("--auto-folds", dest="auto_folds", type=int,
                   help="make k random folds instead (seeded)")
    p.add_argument("--save-folds", dest="save_folds", help="persist the folds used")
    p.add_argument("--objective", choices=list(OBJECTIVES))
    p.add_argument("--depth", type=int)
    p.add_argument("--k1", type=float, help="fixed first-pass k1 for rm3/grf")
    p.add_argument("--b", type=float, help="fixed first-pass b for rm3/grf")
    p.add_argument("--generations")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="JSON tuning result path")
    p.add_argument("--run-output", dest="run_output", help="merged test run path")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("hard-topics", parents=[common],
                       help="metric deltas on the hardest queries of a baseline")
    p.add_argument("--run-a", dest="run_a", help="baseline run (defines hardness)")
    p.add_argument("--run-b", dest="run_b", help="comparison run")
    p.add_argument("--qrels")
    p.add_argument("--fraction", type=float)
    p.add_argument("--ap-threshold", dest="ap_threshold", type=int)
    p.add_argument("--json", dest="json_out", action="store_const", const=True, default=None)
    p.add_argument("--report-dir", dest="report_dir")
    p.set_defaults(func=cmd_hard_topics)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except GrfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001 - last-resort boundary for exit code 1
        log.exception("internal failure")
        return 1


if __name__ == "__main__":
    sys.exit(main())
