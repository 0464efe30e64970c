"""Sequential cross-document link prediction over incremental clusters.

Documents are visited in a fixed order; each mention of the configured
kind is scored against every existing cluster from same-topic preceding
documents (or the current document) plus the singleton candidate, then
attached to the argmax cluster -- or, under teacher forcing, to the
cluster its gold label dictates while the predicted distribution is
recorded for the trainer.

The same code drives inference (plain arrays) and training (autodiff
tensors); only the parameter container differs.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .clusters import ClusterState, contextualize, lift_context
from .corpus import EVENT, Clustering
from .encoder import aggregate_args, compose_mention, encode_span
from .errors import DuplicateDocId, MissingEntityClusters, MissingGold
from .params import ModelParams
from .scorer import (
    arg_coref_feature,
    cosine,
    feature_vector,
    mp_cosine,
    predict_link,
    score_candidates,
)


@dataclass
class ScoreTrace:
    """Counts of scorer invocations backing the complexity claims."""

    invocations: int = 0
    per_mention: list = field(default_factory=list)
    wall_time: float = 0.0

    def record(self, n_candidates):
        self.invocations += n_candidates
        self.per_mention.append(n_candidates)


@dataclass
class StepRecord:
    mention_id: str
    probs: np.ndarray
    logits: object
    pred_index: int
    used_index: int
    gold_index: int | None
    cluster_id: int
    n_candidates: int  # including the singleton
    chosen_size: int  # member count of the chosen cluster, 0 for singleton

    @property
    def probability(self):
        return float(self.probs[self.used_index])


class EngineState:
    """Mutable state of one sequential pass (or an ongoing stream)."""

    def __init__(self, mode, teacher_forced=False, gold_clustering=None,
                 entity_clustering=None, zero_arg_feature=False):
        if mode == EVENT and entity_clustering is None:
            raise MissingEntityClusters(
                "event mode requires an entity clustering for argument features"
            )
        if teacher_forced and gold_clustering is None:
            raise MissingGold("teacher forcing requires a gold clustering")
        self.mode = mode
        self.teacher_forced = teacher_forced
        self.gold_clustering = gold_clustering
        self.entity_clustering = entity_clustering
        self.zero_arg_feature = zero_arg_feature
        self.clusters = ClusterState()
        self.topics = {}
        self.processed_docs = []
        self.event_args = {}
        self.trace = ScoreTrace()

    def predicted_clustering(self):
        return Clustering(self.clusters.assignment)

    def detach(self):
        self.clusters.detach()

    def clone(self):
        out = EngineState.__new__(EngineState)
        out.mode = self.mode
        out.teacher_forced = self.teacher_forced
        out.gold_clustering = self.gold_clustering
        out.entity_clustering = self.entity_clustering
        out.zero_arg_feature = self.zero_arg_feature
        out.clusters = self.clusters.clone()
        out.topics = dict(self.topics)
        out.processed_docs = list(self.processed_docs)
        out.event_args = {k: dict(v) for k, v in self.event_args.items()}
        out.trace = ScoreTrace(
            self.trace.invocations, list(self.trace.per_mention), self.trace.wall_time
        )
        return out


@dataclass
class RunResult:
    clustering: Clustering
    state: EngineState
    doc_steps: list  # (doc_id, [StepRecord]) in processing order

    @property
    def trace(self):
        return self.state.trace


def order_documents(corpus, seed=None):
    """Deterministic document order: by doc_id, optionally seed-shuffled."""
    docs = sorted(corpus.documents, key=lambda d: d.doc_id)
    if seed is not None:
        rng = np.random.default_rng(seed)
        rng.shuffle(docs)
    return docs


def topic_for(doc, topics=None):
    """Topic id for a document: explicit assignment, gold topic, or itself."""
    if topics and doc.doc_id in topics:
        return topics[doc.doc_id]
    return doc.topic_gold if doc.topic_gold is not None else doc.doc_id


def candidate_set(state, topic_id):
    """Clusters visible to a mention in `topic_id`, in cluster-id order.

    The singleton candidate is implicit and always scored last.
    """
    return [c for c in state.clusters.clusters if c.topic_id == topic_id]


def gold_label(mention, candidates, gold_clustering):
    """Index of the candidate holding a gold-coreferent antecedent, else the
    singleton index (= len(candidates))."""
    if mention.mention_id not in gold_clustering:
        raise MissingGold(f"mention '{mention.mention_id}' has no gold cluster")
    gold = gold_clustering[mention.mention_id]
    hits = [
        i
        for i, c in enumerate(candidates)
        if any(gold_clustering.get(m) == gold for m in c.members)
    ]
    # clusters partition mentions, so teacher forcing yields at most one hit
    assert len(hits) <= 1, "gold cluster split across candidates"
    return hits[0] if hits else len(candidates)


def _token_vec(store, doc_id, index):
    return store.token(doc_id, index).astype(np.float64)


def _span_vec(store, doc_id, mention):
    return encode_span(
        _token_vec(store, doc_id, mention.start), _token_vec(store, doc_id, mention.end)
    )


def _structure_refs(mention, mode):
    """Ids of the other-kind mentions aggregated into this mention's rep."""
    if mode == EVENT:
        return [ref for _, ref in mention.args]
    return [trigger for trigger, _ in mention.events_participated]


def encode_mention(doc, mention, by_id, store, params, mode):
    """Full mention representation from span and aggregated structure."""
    h_span = _span_vec(store, doc.doc_id, mention)
    refs = [by_id[r] for r in _structure_refs(mention, mode)]
    refs.sort(key=lambda m: (m.start, m.end))
    arg_vecs = [_span_vec(store, doc.doc_id, r) for r in refs]
    h_args = aggregate_args(arg_vecs, params)
    return compose_mention(h_span, h_args, params)


def process_mention(state, doc, mention, by_id, store, params):
    """Score one mention against its candidates and update the clustering."""
    topic = state.topics[doc.doc_id]
    candidates = candidate_set(state, topic)
    ctx = lift_context(store.context(doc.doc_id).astype(np.float64))
    h_x = encode_mention(doc, mention, by_id, store, params, state.mode)

    query_args = mention.args_by_role() if state.mode == EVENT else None
    features = []
    for cand in candidates + [None]:  # None = the singleton candidate
        rep = ctx if cand is None else cand.rep  # ctx is the lifted singleton rep
        f_cos = cosine(h_x, rep)
        f_mp = mp_cosine(h_x, rep, params.W_p)
        f_r = None
        if state.mode == EVENT:
            if state.zero_arg_feature:
                f_r = np.zeros(ad.value(params.f_emb[0]).shape[0])
            else:
                member_args = (
                    [] if cand is None
                    else [state.event_args[m] for m in cand.members]
                )
                f_r = arg_coref_feature(
                    query_args, member_args, state.entity_clustering, params.f_emb
                )
        features.append(feature_vector(h_x, rep, f_cos, f_mp, f_r))

    dist = score_candidates(features, params)
    state.trace.record(len(features))
    pred = predict_link(dist)
    gold = None
    if state.teacher_forced:
        gold = gold_label(mention, candidates, state.gold_clustering)
    used = gold if state.teacher_forced else pred

    chosen_size = 0 if used == len(candidates) else candidates[used].count
    h_c = contextualize(h_x, ctx, params)
    if used == len(candidates):
        cid = state.clusters.new_cluster(h_c, mention.mention_id, topic)
    else:
        cid = candidates[used].cluster_id
        state.clusters.add_member(cid, h_c, mention.mention_id)
    if state.mode == EVENT:
        state.event_args[mention.mention_id] = query_args

    return StepRecord(
        mention_id=mention.mention_id,
        probs=dist.probs,
        logits=dist.logits,
        pred_index=pred,
        used_index=used,
        gold_index=gold,
        cluster_id=cid,
        n_candidates=len(features),
        chosen_size=chosen_size,
    )


def process_document(state, doc, store, params, topic_id=None):
    """Process every kind-matching mention of one document in span order."""
    if doc.doc_id in state.topics:
        raise DuplicateDocId(f"document '{doc.doc_id}' already processed")
    state.topics[doc.doc_id] = (
        topic_id if topic_id is not None else topic_for(doc)
    )
    state.processed_docs.append(doc.doc_id)
    by_id = {m.mention_id: m for m in doc.mentions}
    started = time.perf_counter()
    records = [
        process_mention(state, doc, m, by_id, store, params)
        for m in doc.mentions_of(state.mode)
    ]
    state.trace.wall_time += time.perf_counter() - started
    return records


def _as_namespace(params):
    return params.as_namespace() if isinstance(params, ModelParams) else params


def run_corpus(corpus, store, params, mode, topics=None, teacher_forced=False,
               entity_clustering=None, gold_clustering=None, order=None, seed=None,
               zero_arg_feature=False):
    """One sequential pass over the whole corpus.

    `topics` maps doc_id to a topic id; documents without an assignment
    fall back to their gold topic, then to their own id.  `order` fixes an
    explicit document order (list of doc ids); otherwise documents are
    visited in doc_id order, shuffled when `seed` is given.
    """
    params = _as_namespace(params)
    if teacher_forced and gold_clustering is None:
        gold_clustering = corpus.gold_clustering(mode)
    if mode == EVENT and entity_clustering is None and teacher_forced:
        entity_clustering = corpus.gold_clustering("entity")
    state = EngineState(
        mode,
        teacher_forced=teacher_forced,
        gold_clustering=gold_clustering,
        entity_clustering=entity_clustering,
        zero_arg_feature=zero_arg_feature,
    )
    if order is not None:
        docs = [corpus.document(doc_id) for doc_id in order]
    else:
        docs = order_documents(corpus, seed)
    doc_steps = []
    for doc in docs:
        records = process_document(state, doc, store, params, topic_for(doc, topics))
        doc_steps.append((doc.doc_id, records))
    return RunResult(state.predicted_clustering(), state, doc_steps)


def stream_add_document(state, doc, store, params, topic_id=None):
    """Process one new document against an existing engine state.

    Prior clusters are only ever appended to; the new document's mentions
    see same-topic clusters plus each other, exactly as a full rerun with
    this document ordered last would.
    """
    if doc.doc_id in state.topics or doc.doc_id in state.processed_docs:
        raise DuplicateDocId(f"document '{doc.doc_id}' was already processed")
    params = _as_namespace(params)
    return process_document(state, doc, store, params, topic_id)


# --- state persistence (for the stream subcommand) -------------------------

def state_to_dict(state):
    state.detach()
    clusters = [
        {
            "cluster_id": c.cluster_id,
            "topic_id": c.topic_id,
            "members": list(c.members),
            "count": c.count,
            "sum_vec": [float(v) for v in np.asarray(c.sum_vec)],
        }
        for c in state.clusters.clusters
    ]
    return {
        "mode": state.mode,
        "topics": dict(state.topics),
        "processed_docs": list(state.processed_docs),
        "clusters": clusters,
        "assignment": dict(state.clusters.assignment),
        "event_args": {
            mid: {role.name: ref for role, ref in args.items()}
            for mid, args in state.event_args.items()
        },
        "entity_clustering": (
            None
            if state.entity_clustering is None
            else dict(state.entity_clustering.mapping)
        ),
        "trace": {
            "invocations": state.trace.invocations,
            "per_mention": list(state.trace.per_mention),
            "wall_time": state.trace.wall_time,
        },
    }


def state_from_dict(data):
    from .corpus import Role

    entity_clustering = (
        None
        if data.get("entity_clustering") is None
        else Clustering(data["entity_clustering"])
    )
    state = EngineState.__new__(EngineState)
    state.mode = data["mode"]
    state.teacher_forced = False
    state.gold_clustering = None
    state.entity_clustering = entity_clustering
    state.zero_arg_feature = False
    state.topics = dict(data["topics"])
    state.processed_docs = list(data["processed_docs"])
    state.event_args = {
        mid: {Role[name]: ref for name, ref in args.items()}
        for mid, args in data.get("event_args", {}).items()
    }
    state.trace = ScoreTrace(
        data["trace"]["invocations"],
        list(data["trace"]["per_mention"]),
        data["trace"]["wall_time"],
    )
    cs = ClusterState()
    for c in data["clusters"]:
        cluster = _restore_cluster(c)
        cs.clusters.append(cluster)
    cs.assignment = dict(data["assignment"])
    state.clusters = cs
    if state.mode == EVENT and state.entity_clustering is None:
        raise MissingEntityClusters("stored event-mode state lacks entity clustering")
    return state


def _restore_cluster(c):
    from .clusters import Cluster

    cluster = Cluster(
        c["cluster_id"],
        np.asarray(c["sum_vec"], dtype=np.float64),
        c["members"][0],
        c["topic_id"],
    )
    cluster.members = list(c["members"])
    cluster.count = c["count"]
    return cluster
