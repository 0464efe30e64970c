"""Coreference evaluation: MUC, B-cubed, CEAF-e, and their CoNLL average.

MUC counts the links missing from the partition each clustering induces
on the other's clusters; B-cubed averages per-mention overlap ratios;
CEAF-e scores the best one-to-one cluster alignment under
phi4(K, R) = 2|K & R| / (|K| + |R|), found exactly with the Hungarian
method.  All metrics are invariant to cluster relabeling and mention
order.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import UniverseMismatch


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float
    defined: bool = True

    @classmethod
    def from_pr(cls, precision, recall, defined=True):
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
        return cls(precision, recall, f1, defined)


def _check_universe(pred, gold):
    if pred.mentions() != gold.mentions():
        missing = gold.mentions() - pred.mentions()
        extra = pred.mentions() - gold.mentions()
        raise UniverseMismatch(
            f"clusterings cover different mentions "
            f"({len(missing)} missing, {len(extra)} extra)"
        )


def _muc_direction(key_clusters, response_mapping):
    """Vilain link count: sum(|S| - |partition of S by response|) over key."""
    num = 0
    den = 0
    for cluster in key_clusters.values():
        parts = {response_mapping.get(m) for m in cluster}
        num += len(cluster) - len(parts)
        den += len(cluster) - 1
    return num, den


def muc(pred, gold):
    """Link-based score; undefined (flagged, zeros) when either side is all
    singletons."""
    _check_universe(pred, gold)
    r_num, r_den = _muc_direction(gold.clusters(), pred.mapping)
    p_num, p_den = _muc_direction(pred.clusters(), gold.mapping)
    if r_den == 0 or p_den == 0:
        return ScoreTriple(0.0, 0.0, 0.0, defined=False)
    return ScoreTriple.from_pr(p_num / p_den, r_num / r_den)


def b_cubed(pred, gold):
    """Mention-based score: mean per-mention overlap ratios."""
    _check_universe(pred, gold)
    mentions = gold.mentions()
    if not mentions:
        return ScoreTriple.from_pr(1.0, 1.0)
    pred_clusters = pred.clusters()
    gold_clusters = gold.clusters()
    recall = 0.0
    precision = 0.0
    for m in mentions:
        p_cluster = pred_clusters[pred[m]]
        g_cluster = gold_clusters[gold[m]]
        overlap = len(p_cluster & g_cluster)
        recall += overlap / len(g_cluster)
        precision += overlap / len(p_cluster)
    n = len(mentions)
    return ScoreTriple.from_pr(precision / n, recall / n)


def phi4(a, b):
    return 2.0 * len(a & b) / (len(a) + len(b))


def min_cost_assignment(cost):
    """Exact minimum-cost assignment of rows to columns (rows <= cols).

    Classic Hungarian method with potentials and shortest augmenting
    paths, O(n^2 m).  Returns (row, col) pairs covering every row.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    if n > m:
        pairs = min_cost_assignment(cost.T)
        return [(r, c) for c, r in pairs]
    INF = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    match = [0] * (m + 1)  # 1-based row matched to each column, 0 = free
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [INF] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = INF
            j1 = -1
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    return [(match[j] - 1, j - 1) for j in range(1, m + 1) if match[j] != 0]


def max_weight_alignment(weights):
    """Best one-to-one alignment under a nonnegative weight matrix."""
    w = np.asarray(weights, dtype=np.float64)
    pairs = min_cost_assignment(-w)
    return [(r, c) for r, c in pairs], float(sum(w[r, c] for r, c in pairs))


def _exhaustive_alignment(weights):
    """Brute-force optimum over all one-to-one alignments (oracle; small n)."""
    w = np.asarray(weights, dtype=np.float64)
    n, m = w.shape
    if n > m:
        return _exhaustive_alignment(w.T)
    best = 0.0
    for perm in permutations(range(m), n):
        best = max(best, sum(w[i, j] for i, j in enumerate(perm)))
    return best


def ceaf_e(pred, gold):
    """Entity-alignment score under the optimal one-to-one cluster matching."""
    _check_universe(pred, gold)
    gold_clusters = list(gold.clusters().values())
    pred_clusters = list(pred.clusters().values())
    if not gold_clusters and not pred_clusters:
        return ScoreTriple.from_pr(1.0, 1.0)
    weights = np.array(
        [[phi4(g, p) for p in pred_clusters] for g in gold_clusters]
    )
    _, total = max_weight_alignment(weights)
    return ScoreTriple.from_pr(total / len(pred_clusters), total / len(gold_clusters))


def conll_f1(pred, gold):
    """Arithmetic mean of the MUC, B-cubed, and CEAF-e F1 scores."""
    return (muc(pred, gold).f1 + b_cubed(pred, gold).f1 + ceaf_e(pred, gold).f1) / 3.0


def exclude_gold_singletons(pred, gold):
    """Restrict both clusterings to mentions in non-singleton gold clusters."""
    from .corpus import Clustering

    keep = set()
    for cluster in gold.clusters().values():
        if len(cluster) > 1:
            keep |= cluster
    pred_r = Clustering({m: c for m, c in pred.mapping.items() if m in keep})
    gold_r = Clustering({m: c for m, c in gold.mapping.items() if m in keep})
    return pred_r, gold_r


def score_report(pred, gold, exclude_singletons=False):
    """All four metrics as a nested dict (the `eval` report payload)."""
    if exclude_singletons:
        pred, gold = exclude_gold_singletons(pred, gold)
    result = {}
    for name, fn in (("muc", muc), ("b3", b_cubed), ("ceaf_e", ceaf_e)):
        triple = fn(pred, gold)
        result[name] = {
            "precision": triple.precision,
            "recall": triple.recall,
            "f1": triple.f1,
        }
        if not triple.defined:
            result[name]["undefined"] = True
    result["conll"] = (
        result["muc"]["f1"] + result["b3"]["f1"] + result["ceaf_e"]["f1"]
    ) / 3.0
    return result
