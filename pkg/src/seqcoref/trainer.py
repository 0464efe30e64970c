"""Cross-entropy training with per-document batches and early stopping.

All mentions of one document form a batch: a teacher-forced pass records
one link distribution per mention, the batch loss is the mean negative
log probability of the gold links, and one Adam step follows each
document.  Contributions of earlier documents to cluster sums are held
constant; gradients flow through every step of the current document.

After each epoch the model predicts the dev corpus (predicted topics,
predicted clusters) and training stops once the dev CoNLL F1 fails to
improve for more than `patience` consecutive epochs.
"""

import math
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from . import autodiff as ad
from .corpus import ENTITY, EVENT
from .engine import (
    EngineState,
    order_documents,
    process_document,
    run_corpus,
    topic_for,
)
from .errors import EmptyDocument, NonFiniteGradient
from .metrics import conll_f1
from .params import Config, ModelParams
from .topics import kmeans, tfidf_features

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_LIST_PARAMS = ("W_p", "f_emb")  # stacked tensors handled as per-row lists


def document_loss(steps):
    """Mean negative log gold-link probability over a document's steps.

    Accepts StepRecords or (distribution, gold index) pairs, where the
    distribution is a probability array or anything with a `.probs`.
    """
    if not steps:
        raise EmptyDocument("document produced no prediction steps")
    total = 0.0
    for step in steps:
        if hasattr(step, "probs"):
            probs, gold = step.probs, step.gold_index
        else:
            dist, gold = step
            probs = getattr(dist, "probs", dist)
        total += -math.log(float(np.asarray(probs)[gold]))
    return total / len(steps)


def graph_loss(records):
    """Differentiable version of document_loss over engine StepRecords."""
    if not records:
        raise EmptyDocument("document produced no prediction steps")
    return ad.scale(
        ad.add_n([ad.nll(r.logits, r.gold_index) for r in records]),
        1.0 / len(records),
    )


def array_namespace(values):
    """Plain-array parameter view for forward-only evaluation."""
    return SimpleNamespace(**values)


def tensor_namespace(values):
    """Autodiff parameter view plus handles for gradient collection."""
    ns = SimpleNamespace()
    handles = {}
    for name, arr in values.items():
        if name in _LIST_PARAMS:
            ts = [ad.Tensor(arr[i]) for i in range(arr.shape[0])]
            setattr(ns, name, ts)
            handles[name] = ts
        else:
            t = ad.Tensor(arr)
            setattr(ns, name, t)
            handles[name] = t
    return ns, handles


def collect_grads(handles, values):
    """Gradient arrays aligned with `values`; untouched tensors get zeros."""
    grads = {}
    for name, handle in handles.items():
        if name in _LIST_PARAMS:
            rows = [
                t.grad if t.grad is not None else np.zeros_like(t.data)
                for t in handle
            ]
            grads[name] = np.stack(rows)
        else:
            grads[name] = (
                handle.grad
                if handle.grad is not None
                else np.zeros_like(values[name])
            )
    return grads


def global_norm(grads):
    return math.sqrt(sum(float((g * g).sum()) for g in grads.values()))


def clip_gradients(grads, max_norm=30.0):
    """Scale all gradients so their global L2 norm is at most max_norm."""
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise NonFiniteGradient(f"gradient for {name} is not finite")
    norm = global_norm(grads)
    if norm > max_norm:
        factor = max_norm / norm
        grads = {name: g * factor for name, g in grads.items()}
    return grads


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def for_values(cls, values):
        return cls(
            m={k: np.zeros_like(v) for k, v in values.items()},
            v={k: np.zeros_like(v) for k, v in values.items()},
        )

    def step(self, values, grads, lr):
        self.t += 1
        bc1 = 1.0 - ADAM_BETA1 ** self.t
        bc2 = 1.0 - ADAM_BETA2 ** self.t
        for name, g in grads.items():
            self.m[name] = ADAM_BETA1 * self.m[name] + (1 - ADAM_BETA1) * g
            self.v[name] = ADAM_BETA2 * self.v[name] + (1 - ADAM_BETA2) * g * g
            m_hat = self.m[name] / bc1
            v_hat = self.v[name] / bc2
            values[name] = values[name] - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def document_forward(values, doc, base_state, store, topic_id):
    """Loss of one document against a frozen prior state (pure function of
    the parameter arrays; this is what finite differences differentiate)."""
    state = base_state.clone()
    records = process_document(
        state, doc, store, array_namespace(values), topic_id
    )
    return document_loss(records)


def document_backward(values, doc, base_state, store, topic_id):
    """(loss, gradient dict) for one document against a frozen prior state."""
    ns, handles = tensor_namespace(values)
    state = base_state.clone()
    records = process_document(state, doc, store, ns, topic_id)
    loss = graph_loss(records)
    loss.backward()
    return float(ad.value(loss)), collect_grads(handles, values), state


def _fresh_epoch_state(corpus, config):
    gold = corpus.gold_clustering(config.mode)
    entity = corpus.gold_clustering(ENTITY) if config.mode == EVENT else None
    return EngineState(
        config.mode,
        teacher_forced=True,
        gold_clustering=gold,
        entity_clustering=entity,
    )


def refresh_cluster_reps(state, corpus, store, values):
    """Recompute every cluster sum from its members under current parameters.

    Candidates are recomputed from the processed-mention set at each step;
    with one optimizer step per document the stored sums go stale, so the
    train loop rebuilds them (as constants) before starting a new document.
    """
    from .clusters import contextualize, lift_context
    from .engine import encode_mention

    ns = array_namespace(values)
    encoded = {}
    for doc_id in state.processed_docs:
        doc = corpus.document(doc_id)
        by_id = {m.mention_id: m for m in doc.mentions}
        ctx = lift_context(store.context(doc_id).astype(np.float64))
        for m in doc.mentions_of(state.mode):
            if m.mention_id in state.clusters.assignment:
                h_x = encode_mention(doc, m, by_id, store, ns, state.mode)
                encoded[m.mention_id] = contextualize(h_x, ctx, ns)
    for cluster in state.clusters.clusters:
        total = np.zeros_like(np.asarray(cluster.sum_vec, dtype=np.float64))
        for mid in cluster.members:
            total = total + encoded[mid]
        cluster.sum_vec = total


def predict_dev(values_or_params, corpus, store, config, entity_clustering=None,
                zero_arg_feature=False):
    """Inference-mode prediction mirroring the test-time protocol: predicted
    topics via K-means (K clamped to the document count) and predicted
    clusters.  Event mode uses the supplied (or gold) entity clustering."""
    k = min(config.K_topics, len(corpus.documents))
    topics = kmeans(tfidf_features(corpus), k, seed=config.seed)
    if config.mode == EVENT and entity_clustering is None:
        entity_clustering = corpus.gold_clustering(ENTITY)
    params = (
        array_namespace(values_or_params)
        if isinstance(values_or_params, dict)
        else values_or_params
    )
    return run_corpus(
        corpus,
        store,
        params,
        config.mode,
        topics=topics,
        entity_clustering=entity_clustering,
        zero_arg_feature=zero_arg_feature,
    )


@dataclass
class TrainResult:
    params: ModelParams
    config: Config
    best_dev_f1: float
    epochs_run: int
    stopped_early: bool
    history: list = field(default_factory=list)


def train(train_corpus, train_store, dev_corpus, dev_store, config, log_fn=None,
          init_params=None):
    """Full training loop; returns the best checkpoint by dev CoNLL F1."""
    base = init_params if init_params is not None else ModelParams.init(config)
    values = {name: arr.astype(np.float64) for name, arr in base.items()}
    adam = AdamState.for_values(values)
    dev_gold = dev_corpus.gold_clustering(config.mode)

    best_f1 = -1.0
    best_values = {k: v.copy() for k, v in values.items()}
    since_improved = 0
    history = []
    stopped_early = False
    epochs_run = 0

    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        state = _fresh_epoch_state(train_corpus, config)
        losses = []
        # the document order is arbitrary; re-drawing it each epoch exposes
        # the scorer to varied candidate-set regimes (deterministic per seed)
        for doc in order_documents(train_corpus, seed=(config.seed, epoch)):
            if not doc.mentions_of(config.mode):
                continue  # no steps, no loss contribution
            refresh_cluster_reps(state, train_corpus, train_store, values)
            ns, handles = tensor_namespace(values)
            records = process_document(state, doc, train_store, ns, topic_for(doc))
            loss = graph_loss(records)
            loss.backward()
            grads = clip_gradients(collect_grads(handles, values), config.clip_norm)
            adam.step(values, grads, config.learning_rate)
            state.detach()
            losses.append(float(ad.value(loss)))
        train_loss = float(np.mean(losses)) if losses else 0.0

        result = predict_dev(values, dev_corpus, dev_store, config)
        dev_f1 = conll_f1(result.clustering, dev_gold)
        if dev_f1 > best_f1:
            best_f1 = dev_f1
            best_values = {k: v.copy() for k, v in values.items()}
            since_improved = 0
        else:
            since_improved += 1
        stopped_early = since_improved > config.patience
        record = {
            "epoch": epoch,
            "train_loss": train_loss,
            "dev_conll_f1": dev_f1,
            "stopped": stopped_early or epoch == config.max_epochs,
        }
        history.append(record)
        if log_fn is not None:
            log_fn(record)
        if stopped_early:
            break

    final = ModelParams(
        {k: v.astype(np.float32) for k, v in best_values.items()}
    )
    return TrainResult(
        params=final,
        config=config,
        best_dev_f1=best_f1,
        epochs_run=epochs_run,
        stopped_early=stopped_early,
        history=history,
    )
