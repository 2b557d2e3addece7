"""Independent reference computations the test suite checks against.

Everything here is written from the defining formulas, structured
differently from the package code (full enumeration, no inverted index,
no shared helpers) so agreement is evidence rather than tautology.
"""

import math


def expansion_mix(query_weights, dllm_counts, beta, theta):
    """Enumerate the interpolated expansion distribution term by term:
    beta-weighted query mass everywhere, generative mass only for the theta
    most probable generated terms, then normalize."""
    total = sum(dllm_counts.values())
    probs = {t: c / total for t, c in dllm_counts.items()} if total else {}
    admitted = [
        t for t, _ in sorted(probs.items(), key=lambda kv: (-kv[1], kv[0]))[:theta]
    ]
    raw = {}
    for t in set(query_weights) | set(admitted):
        value = beta * query_weights.get(t, 0.0)
        if t in admitted:
            value += (1.0 - beta) * probs[t]
        if value:
            raw[t] = value
    z = sum(raw.values())
    return {t: v / z for t, v in raw.items()}


def rm3_mix(query_weights, scored_docs, fb_docs, fb_terms, w0):
    """Relevance-model mixture from (doc_id, score, counts) triples already
    ranked: normalized scores weight per-document MLE models, the pooled
    model is truncated and renormalized, then mixed with the query."""
    chosen = scored_docs[:fb_docs]
    z_score = sum(score for _, score, _ in chosen)
    rm1 = {}
    for _, score, counts in chosen:
        doc_total = sum(counts.values())
        if doc_total == 0:
            continue
        for term, count in counts.items():
            rm1[term] = rm1.get(term, 0.0) + (count / doc_total) * (score / z_score)
    kept = sorted(rm1.items(), key=lambda kv: (-kv[1], kv[0]))[:fb_terms]
    z_kept = sum(v for _, v in kept)
    trunc = {t: v / z_kept for t, v in kept}
    raw = {}
    for t in set(query_weights) | set(trunc):
        value = w0 * query_weights.get(t, 0.0) + (1.0 - w0) * trunc.get(t, 0.0)
        if value:
            raw[t] = value
    z = sum(raw.values())
    return {t: v / z for t, v in raw.items()}


def bm25_rank(docs, weights, k1, b, depth):
    """Exhaustively score every document: docs is a list of
    (doc_id, token list); returns [(doc_id, score)] ranked like search."""
    lengths = {doc_id: len(tokens) for doc_id, tokens in docs}
    total_len = sum(lengths.values())
    n = len(docs)
    avgdl = total_len / n if n else 0.0
    df = {}
    for term in weights:
        df[term] = sum(1 for _, tokens in docs if term in tokens)
    scored = []
    for doc_id, tokens in docs:
        score = 0.0
        for term in sorted(weights):
            tf = tokens.count(term)
            if tf == 0:
                continue
            idf = math.log(1.0 + (n - df[term] + 0.5) / (df[term] + 0.5))
            denom = tf + k1 * (1.0 - b + b * lengths[doc_id] / avgdl)
            score += weights[term] * (idf * (tf * (k1 + 1.0)) / denom)
        if score != 0.0:
            scored.append((doc_id, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:depth]


def ndcg10(run_doc_ids, grades):
    """Brute-force NDCG@10 over a doc id list and a grade dict."""
    dcg = 0.0
    for i, doc_id in enumerate(run_doc_ids[:10]):
        dcg += (2 ** grades.get(doc_id, 0) - 1) / math.log2(i + 2)
    idcg = 0.0
    for i, grade in enumerate(sorted(grades.values(), reverse=True)[:10]):
        idcg += (2 ** grade - 1) / math.log2(i + 2)
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def average_precision(run_doc_ids, relevant, depth=1000):
    """None when there is nothing relevant to find."""
    if not relevant:
        return None
    total = 0.0
    found = 0
    for i, doc_id in enumerate(run_doc_ids[:depth]):
        if doc_id in relevant:
            found += 1
            total += found / (i + 1)
    return total / len(relevant)


def recall(run_doc_ids, relevant, depth=1000):
    if not relevant:
        return None
    found = sum(1 for doc_id in run_doc_ids[:depth] if doc_id in relevant)
    return found / len(relevant)
