"""Score-count instrumentation: sequential-vs-pairwise comparison.

A pairwise graph-based scorer evaluates every mention pair inside each
topic; the sequential engine evaluates each mention only against the
clusters existing at its step (plus the singleton candidate), so its
total is bounded by (c + 1) * m for c final clusters and m mentions.
These counters, not wall time, are the asserted quantities.
"""

from dataclasses import dataclass

from .corpus import Clustering
from .engine import stream_add_document, topic_for
from .errors import BoundViolation


def _topic_mention_counts(corpus, topics, kind):
    counts = {}
    for doc in corpus.documents:
        t = topic_for(doc, topics)
        counts[t] = counts.get(t, 0) + len(doc.mentions_of(kind))
    return counts


def pairwise_count(corpus, topics, kind):
    """Scores a pairwise model computes: all same-topic mention pairs."""
    return sum(
        m * (m - 1) // 2 for m in _topic_mention_counts(corpus, topics, kind).values()
    )


@dataclass
class BoundReport:
    mentions: int
    clusters: int
    invocations: int
    bound: int  # (c + 1) * m, counting the singleton candidate
    bound_no_singleton: int  # c * m
    pairwise: int
    ratio: float


def sequential_bound_check(trace, n_clusters, n_mentions, pairwise=None):
    """Verify the instrumented run against its score-count bound.

    Recomputes the total from the per-step log, then asserts
    invocations <= (c + 1) * m.  Raises BoundViolation otherwise.
    """
    recomputed = sum(trace.per_mention)
    if recomputed != trace.invocations:
        raise BoundViolation(
            f"per-step log sums to {recomputed}, counter says {trace.invocations}"
        )
    bound = (n_clusters + 1) * n_mentions
    if trace.invocations > bound:
        raise BoundViolation(
            f"{trace.invocations} scorer invocations exceed (c+1)*m = {bound}"
        )
    ratio = trace.invocations / pairwise if pairwise else float("nan")
    return BoundReport(
        mentions=n_mentions,
        clusters=n_clusters,
        invocations=trace.invocations,
        bound=bound,
        bound_no_singleton=n_clusters * n_mentions,
        pairwise=pairwise if pairwise is not None else 0,
        ratio=ratio,
    )


def streaming_cost(state, new_doc, store, params, topic_id=None):
    """Measured sequential cost of absorbing one new document, next to the
    pairwise model's cost of scoring it against every prior mention."""
    prior_mentions = len(state.clusters.assignment)
    topic = topic_id
    if topic is None:
        topic = topic_for(new_doc, state.topics)
    clusters_in_topic = sum(
        1 for c in state.clusters.clusters if c.topic_id == topic
    )
    scratch = state.clone()
    before = scratch.trace.invocations
    records = stream_add_document(scratch, new_doc, store, params, topic)
    ours = scratch.trace.invocations - before
    m_new = len(records)
    pairwise = prior_mentions * m_new + m_new * (m_new - 1) // 2
    bound = (clusters_in_topic + m_new) * m_new + m_new
    if ours > bound:
        raise BoundViolation(f"streaming cost {ours} exceeds bound {bound}")
    return {
        "ours": ours,
        "pairwise": pairwise,
        "bound": bound,
        "new_mentions": m_new,
        "clusters_in_topic": clusters_in_topic,
        "prior_mentions": prior_mentions,
    }


def lemma_baseline(corpus, topics, kind, lemma_table=None):
    """Cluster mentions by (topic, head lemma); head = last token of the span.

    The default lemma function lowercases; `lemma_table` maps surface
    forms (lowercased) to lemmas for anything smarter.
    """
    table = lemma_table or {}
    pairs = []
    for doc in corpus.documents:
        topic = topic_for(doc, topics)
        for m in doc.mentions_of(kind):
            head = doc.tokens[m.end].lower()
            lemma = table.get(head, head)
            pairs.append((m.mention_id, (topic, lemma)))
    return Clustering.from_labels(pairs)
