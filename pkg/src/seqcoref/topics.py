"""Predicted document topics: K-means over TF-IDF n-gram features.

Features are raw-count tf times idf = ln(N / df) over unigrams, bigrams,
and trigrams, skipping any n-gram that contains a stop word.  Vectors
are cosine-normalized before Lloyd iterations with k-means++ seeding, so
the clustering is deterministic for a fixed seed.
"""

import math
from importlib import resources

import numpy as np

from .errors import CoverageMismatch, TooFewDocuments

MAX_NGRAM = 3
_MAX_LLOYD_ITERS = 100


def default_stopwords():
    text = resources.files("seqcoref").joinpath("data/stopwords.txt").read_text()
    return frozenset(w for w in text.split() if w)


def load_stopwords(path):
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def _ngrams(tokens, stopwords):
    toks = [t.lower() for t in tokens]
    for n in range(1, MAX_NGRAM + 1):
        for i in range(len(toks) - n + 1):
            gram = toks[i : i + n]
            if any(g in stopwords for g in gram):
                continue
            yield " ".join(gram)


def tfidf_features(corpus, stopwords=None):
    """Per-document sparse tf-idf vectors as {ngram: weight} dicts."""
    if stopwords is None:
        stopwords = default_stopwords()
    counts = {}
    for doc in corpus.documents:
        tf = {}
        for gram in _ngrams(doc.tokens, stopwords):
            tf[gram] = tf.get(gram, 0) + 1
        counts[doc.doc_id] = tf
    n_docs = len(corpus.documents)
    df = {}
    for tf in counts.values():
        for gram in tf:
            df[gram] = df.get(gram, 0) + 1
    features = {}
    for doc_id, tf in counts.items():
        vec = {}
        for gram, count in tf.items():
            idf = math.log(n_docs / df[gram])
            if idf > 0.0:
                vec[gram] = count * idf
        features[doc_id] = vec
    return features


def _dense_matrix(features):
    doc_ids = sorted(features)
    vocab = sorted({g for vec in features.values() for g in vec})
    index = {g: i for i, g in enumerate(vocab)}
    x = np.zeros((len(doc_ids), len(vocab)))
    for row, doc_id in enumerate(doc_ids):
        for gram, weight in features[doc_id].items():
            x[row, index[gram]] = weight
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    np.divide(x, norms, out=x, where=norms > 0)
    return doc_ids, x


def _kmeans_pp_seed(x, k, rng):
    n = x.shape[0]
    centers = [int(rng.integers(n))]
    d2 = np.sum((x - x[centers[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with a center; pick arbitrarily
            choice = int(rng.integers(n))
        else:
            choice = int(rng.choice(n, p=d2 / total))
        centers.append(choice)
        d2 = np.minimum(d2, np.sum((x - x[choice]) ** 2, axis=1))
    return x[centers].copy()


def _lloyd(x, k, rng):
    n = x.shape[0]
    centers = _kmeans_pp_seed(x, k, rng)
    assign = np.full(n, -1)
    for _ in range(_MAX_LLOYD_ITERS):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        reseeded = set()
        for c in range(k):
            mask = assign == c
            if mask.any():
                centers[c] = x[mask].mean(axis=0)
            else:
                dist_to_own = d2[np.arange(n), assign].copy()
                for r in reseeded:
                    dist_to_own[r] = -np.inf
                farthest = int(dist_to_own.argmax())
                reseeded.add(farthest)
                centers[c] = x[farthest]
                assign[farthest] = c
    inertia = float(((x - centers[assign]) ** 2).sum())
    return assign, inertia


def kmeans(features, k=20, seed=0, n_init=10):
    """Lloyd's algorithm with k-means++ seeding on normalized vectors.

    Runs `n_init` seedings (derived deterministically from `seed`) and
    keeps the assignment with the lowest within-cluster sum of squares.
    Empty clusters are reseeded from the point farthest from its
    assigned center.  Returns doc_id -> topic id.
    """
    doc_ids, x = _dense_matrix(features)
    n = x.shape[0]
    if n < k:
        raise TooFewDocuments(f"{n} documents but K={k}")
    best_assign = None
    best_inertia = np.inf
    for run in range(n_init):
        rng = np.random.default_rng((seed, run))
        assign, inertia = _lloyd(x, k, rng)
        if inertia < best_inertia:
            best_inertia = inertia
            best_assign = assign
    return {doc_id: int(best_assign[i]) for i, doc_id in enumerate(doc_ids)}


def _entropy(sizes, n):
    h = 0.0
    for s in sizes:
        if s > 0:
            h -= (s / n) * math.log(s / n)
    return h


def _contingency(pred, gold):
    docs = sorted(pred)
    table = {}
    for d in docs:
        key = (gold[d], pred[d])
        table[key] = table.get(key, 0) + 1
    return table


def clustering_quality(pred, gold):
    """Homogeneity, completeness, V-measure, and adjusted Rand index."""
    if set(pred) != set(gold):
        raise CoverageMismatch("clusterings cover different document sets")
    n = len(pred)
    table = _contingency(pred, gold)
    gold_sizes = {}
    pred_sizes = {}
    for (g, p), c in table.items():
        gold_sizes[g] = gold_sizes.get(g, 0) + c
        pred_sizes[p] = pred_sizes.get(p, 0) + c
    h_gold = _entropy(gold_sizes.values(), n)
    h_pred = _entropy(pred_sizes.values(), n)
    # conditional entropies from the contingency table
    h_gold_given_pred = 0.0
    h_pred_given_gold = 0.0
    for (g, p), c in table.items():
        h_gold_given_pred -= (c / n) * math.log(c / pred_sizes[p])
        h_pred_given_gold -= (c / n) * math.log(c / gold_sizes[g])
    homogeneity = 1.0 if h_gold == 0 else 1.0 - h_gold_given_pred / h_gold
    completeness = 1.0 if h_pred == 0 else 1.0 - h_pred_given_gold / h_pred
    hc = homogeneity + completeness
    v_measure = 2.0 * homogeneity * completeness / hc if hc > 0 else 0.0

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_ij = sum(comb2(c) for c in table.values())
    sum_g = sum(comb2(s) for s in gold_sizes.values())
    sum_p = sum(comb2(s) for s in pred_sizes.values())
    total = comb2(n)
    expected = sum_g * sum_p / total if total > 0 else 0.0
    max_index = (sum_g + sum_p) / 2.0
    denom = max_index - expected
    ari = 1.0 if denom == 0 else (sum_ij - expected) / denom
    return {
        "homogeneity": homogeneity,
        "completeness": completeness,
        "v_measure": v_measure,
        "ari": ari,
    }
