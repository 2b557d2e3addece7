"""Deterministic synthetic experiment for the end-to-end checks.

The corpus is adversarial to pseudo-relevance feedback by construction:
each topic has one relevant document reachable through the query term and
four reachable only through a private topic vocabulary, while distractor
documents repeat the query term and pull first-pass feedback toward their
own noise vocabulary. Generated fixture text samples the topic vocabulary,
so expansion built from it reaches the documents feedback cannot.
"""

import random
from dataclasses import dataclass

from grf.evaluation import Qrels
from grf.generation import GenerationBundle, GenerationParams
from grf.index import Document

SEED = 42
NUM_TOPICS = 20
RELEVANT_PER_TOPIC = 5
DISTRACTORS_PER_TOPIC = 8
TOTAL_DOCS = 500
SUBTASK = "keywords"


@dataclass
class Experiment:
    docs: list[Document]
    topics: dict[str, str]
    qrels: Qrels
    bundles: dict[str, GenerationBundle]
    generated_text: dict[str, str]
    relevant_ids: dict[str, list[str]]
    lexical_relevant: dict[str, str]  # the one relevant doc holding the query term


def build_experiment(seed: int = SEED) -> Experiment:
    rng = random.Random(seed)
    docs: list[Document] = []
    topics: dict[str, str] = {}
    judgments: dict[tuple[str, str], int] = {}
    generated: dict[str, str] = {}
    relevant_ids: dict[str, list[str]] = {}
    lexical: dict[str, str] = {}

    for i in range(NUM_TOPICS):
        qid = f"q{i:02d}"
        key = f"key{i:02d}"
        topics[qid] = key
        topic_terms = [f"t{i:02d}w{j}" for j in range(10)]
        noise_terms = [f"n{i:02d}x{j}" for j in range(6)]

        rel_ids = []
        lex_id = f"{qid}-rel-lex"
        # reachable by the query term only; pads never occur elsewhere
        docs.append(Document(lex_id, f"{key} pad{i:02d}a pad{i:02d}b pad{i:02d}c"))
        judgments[(qid, lex_id)] = 1
        rel_ids.append(lex_id)
        lexical[qid] = lex_id

        for j in range(1, RELEVANT_PER_TOPIC):
            doc_id = f"{qid}-rel-{j}"
            terms = rng.sample(topic_terms, 6)
            docs.append(Document(doc_id, " ".join(terms)))
            judgments[(qid, doc_id)] = 1
            rel_ids.append(doc_id)
        relevant_ids[qid] = rel_ids

        for j in range(DISTRACTORS_PER_TOPIC):
            doc_id = f"{qid}-dis-{j}"
            terms = [key] + rng.sample(noise_terms, 4)
            docs.append(Document(doc_id, " ".join(terms)))

        generated[qid] = " ".join(rng.choices(topic_terms, k=40))

    filler_needed = TOTAL_DOCS - len(docs)
    for k in range(filler_needed):
        terms = [f"fv{rng.randrange(50)}" for _ in range(6)]
        docs.append(Document(f"filler-{k:03d}", " ".join(terms)))
    rng.shuffle(docs)

    bundles = {
        qid: GenerationBundle(
            query_id=qid,
            query_text=topics[qid],
            generations={SUBTASK: text},
            params=GenerationParams(),
            created_at="2024-01-01T00:00:00Z",
            source="fixture",
        )
        for qid, text in generated.items()
    }
    return Experiment(
        docs=docs,
        topics=topics,
        qrels=Qrels(judgments=judgments),
        bundles=bundles,
        generated_text=generated,
        relevant_ids=relevant_ids,
        lexical_relevant=lexical,
    )
