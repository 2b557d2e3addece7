"""BM25 term scoring, weighted search, query parsing."""

import math
import random

import pytest

from grf.errors import ConfigError
from grf.index import Document, build_index
from grf.retrieval import (
    BM25Params,
    Ranking,
    WeightedQuery,
    bm25_term_score,
    parse_plain_query,
    search,
)
from grf.textproc import AnalyzerConfig

from oracles import bm25_rank

RAW = AnalyzerConfig(stopword_list=frozenset(), stemmer="none")
DEFAULTS = BM25Params()


class TestTermScore:
    def test_hand_computed_value(self):
        # idf = ln((3-1+0.5)/(1+0.5) + 1) = ln(8/3) = 0.9808293...
        # tf part = 2*1.9 / (2 + 0.9*(1 - 0.4 + 0.4*4/4)) = 3.8/2.9 = 1.3103448...
        score = bm25_term_score(
            tf=2, doc_len=4, df=1, num_docs=3, avg_doc_length=4.0,
            params=BM25Params(k1=0.9, b=0.4),
        )
        assert score == pytest.approx(math.log(8 / 3) * (3.8 / 2.9), rel=1e-12)
        assert score == pytest.approx(1.2852, abs=5e-5)

    def test_idf_never_negative(self):
        # term in every document still gets positive idf
        score = bm25_term_score(
            tf=1, doc_len=10, df=10**6, num_docs=10**6, avg_doc_length=10.0,
            params=DEFAULTS,
        )
        assert score > 0.0

    def test_tf_saturation_limit(self):
        params = BM25Params(k1=1.2, b=0.75)
        idf = math.log((100 - 3 + 0.5) / (3 + 0.5) + 1)
        score = bm25_term_score(
            tf=10**9, doc_len=50, df=3, num_docs=100, avg_doc_length=40.0,
            params=params,
        )
        assert score == pytest.approx(idf * (params.k1 + 1), rel=1e-6)

    def test_preconditions(self):
        for bad in (dict(tf=0), dict(df=0), dict(doc_len=0)):
            kwargs = dict(tf=1, doc_len=1, df=1, num_docs=1, avg_doc_length=1.0,
                          params=DEFAULTS)
            kwargs.update(bad)
            with pytest.raises(ValueError):
                bm25_term_score(**kwargs)

    def test_param_validation(self):
        with pytest.raises(ConfigError):
            BM25Params(k1=-0.1)
        with pytest.raises(ConfigError):
            BM25Params(b=1.5)


class TestSearch:
    def test_only_matching_docs_scored(self):
        index = build_index([Document("d1", "a a b"), Document("d2", "b")], RAW)
        ranking = search(index, WeightedQuery({"a": 1.0}), DEFAULTS)
        assert [d for d, _ in ranking.entries] == ["d1"]
        assert ranking.entries[0][1] > 0

    def test_absent_term_empty_ranking(self):
        index = build_index([Document("d1", "a")], RAW)
        ranking = search(index, WeightedQuery({"zzz": 1.0}), DEFAULTS)
        assert ranking.entries == []
        assert not ranking.empty_query

    def test_empty_query_flagged(self):
        index = build_index([Document("d1", "a")], RAW)
        ranking = search(index, WeightedQuery({}), DEFAULTS, query_id="q7")
        assert ranking == Ranking(query_id="q7", entries=[], empty_query=True)

    def test_tie_broken_by_doc_id(self):
        # identical documents score identically; order must be lexicographic
        docs = [Document(d, "x y") for d in ["d3", "d1", "d2"]]
        index = build_index(docs, RAW)
        ranking = search(index, WeightedQuery({"x": 1.0}), DEFAULTS)
        assert ranking.doc_ids() == ["d1", "d2", "d3"]

    def test_depth_truncates(self):
        docs = [Document(f"d{i}", "x " * (i + 1)) for i in range(10)]
        index = build_index(docs, RAW)
        ranking = search(index, WeightedQuery({"x": 1.0}), DEFAULTS, depth=3)
        assert len(ranking.entries) == 3

    def test_linearity_under_weight_scaling(self):
        rng = random.Random(5)
        docs = [
            Document(f"d{i}", " ".join(rng.choices("abcde", k=rng.randint(1, 20))))
            for i in range(20)
        ]
        index = build_index(docs, RAW)
        base = search(index, WeightedQuery({"a": 0.5, "b": 0.3, "c": 0.2}), DEFAULTS)
        scaled = search(index, WeightedQuery({"a": 5.0, "b": 3.0, "c": 2.0}), DEFAULTS)
        assert base.doc_ids() == scaled.doc_ids()
        for (_, s1), (_, s2) in zip(base.entries, scaled.entries):
            assert s2 == pytest.approx(10 * s1, rel=1e-12)

    def test_determinism(self):
        docs = [Document(f"d{i}", "a b c a") for i in range(5)]
        index = build_index(docs, RAW)
        query = WeightedQuery({"a": 0.7, "c": 0.3})
        assert search(index, query, DEFAULTS) == search(index, query, DEFAULTS)

    def test_matches_oracle_on_random_corpora(self):
        rng = random.Random(17)
        vocab = [f"t{i}" for i in range(40)]
        for _ in range(25):
            docs = [
                (f"d{i:02d}", rng.choices(vocab, k=rng.randint(0, 30)))
                for i in range(rng.randint(1, 25))
            ]
            index = build_index(
                [Document(d, " ".join(toks)) for d, toks in docs], RAW
            )
            terms = rng.sample(vocab, k=rng.randint(1, 6))
            weights = {t: rng.uniform(0.1, 2.0) for t in terms}
            params = BM25Params(k1=rng.uniform(0.1, 3.0), b=rng.uniform(0.0, 1.0))
            got = search(index, WeightedQuery(weights), params, depth=1000)
            want = bm25_rank(docs, weights, params.k1, params.b, depth=1000)
            assert got.doc_ids() == [d for d, _ in want]
            for (_, s1), (_, s2) in zip(got.entries, want):
                assert s1 == pytest.approx(s2, abs=1e-9)

    def test_invalid_depth(self):
        index = build_index([Document("d1", "a")], RAW)
        with pytest.raises(ConfigError):
            search(index, WeightedQuery({"a": 1.0}), DEFAULTS, depth=0)


class TestWeightedQuery:
    def test_rejects_non_positive_weights(self):
        with pytest.raises(ConfigError):
            WeightedQuery({"a": 0.0})
        with pytest.raises(ConfigError):
            WeightedQuery({"a": -1.0})

    def test_rejects_unknown_source(self):
        with pytest.raises(ConfigError):
            WeightedQuery({"a": 1.0}, source="dense")


class TestParsePlainQuery:
    def test_mle_weights(self):
        query = parse_plain_query("apple apple pie", RAW)
        assert query.weights == {"apple": 2 / 3, "pie": 1 / 3}
        assert query.source == "plain"

    def test_all_stopwords_empty(self):
        assert parse_plain_query("the of and").weights == {}

    def test_single_term(self):
        assert parse_plain_query("x", RAW).weights == {"x": 1.0}

    def test_default_analyzer_stems(self):
        assert parse_plain_query("running the dogs").weights == {
            "dog": 0.5,
            "run": 0.5,
        }

    def test_weights_sum_to_one(self):
        query = parse_plain_query("b a c a b a", RAW)
        assert sum(query.weights.values()) == pytest.approx(1.0, abs=1e-12)
        assert list(query.weights) == sorted(query.weights)
