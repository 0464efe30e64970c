"""Shared fixtures: miniature configs and hand-built corpora."""

import numpy as np
import pytest

from seqcoref.corpus import corpus_from_records
from seqcoref.embeddings import EmbeddingStore
from seqcoref.params import Config


def make_corpus(records, mode="entity"):
    return corpus_from_records(((i + 1, r) for i, r in enumerate(records)), mode)


def mention(mid, kind="entity", start=0, end=0, gold=None, etype=None, args=None):
    rec = {"mention_id": mid, "kind": kind, "start": start, "end": end}
    if gold is not None:
        rec["gold_cluster"] = gold
    if etype is not None:
        rec["entity_type"] = etype
    if args is not None:
        rec["args"] = args
    return rec


def random_store(corpus, dim, seed=0):
    rng = np.random.default_rng(seed)
    store = EmbeddingStore(dim)
    for doc in corpus.documents:
        store.add(
            doc.doc_id,
            rng.normal(size=dim),
            rng.normal(size=(len(doc.tokens), dim)),
        )
    return store


@pytest.fixture
def tiny_entity_config():
    return Config(d_tok=4, d_arg=3, d_f=2, k=2, d_p=3, mode="entity",
                  K_topics=2, seed=0)


@pytest.fixture
def tiny_event_config():
    return Config(d_tok=4, d_arg=3, d_f=2, k=2, d_p=3, mode="event",
                  K_topics=2, seed=0)
