"""Score-count accounting: pairwise baseline, bounds, lemma baseline."""

import numpy as np
import pytest

from conftest import make_corpus, mention, random_store
from seqcoref.bench import (
    lemma_baseline,
    pairwise_count,
    sequential_bound_check,
    streaming_cost,
)
from seqcoref.engine import ScoreTrace, run_corpus
from seqcoref.errors import BoundViolation
from seqcoref.params import Config, ModelParams


def doc_with_mentions(doc_id, topic, n, gold_prefix="g", words=None):
    tokens = words or [f"w{i}" for i in range(n)]
    mentions = [
        mention(f"{doc_id}_m{i}", start=i, end=i, gold=f"{gold_prefix}{i}")
        for i in range(n)
    ]
    return {"doc_id": doc_id, "topic_gold": topic, "tokens": tokens,
            "mentions": mentions}


class TestPairwiseCount:
    def test_single_topic(self):
        c = make_corpus([doc_with_mentions("d1", "T", 4)])
        assert pairwise_count(c, None, "entity") == 6

    def test_two_topics_of_three(self):
        c = make_corpus([
            doc_with_mentions("d1", "A", 3),
            doc_with_mentions("d2", "B", 3, gold_prefix="h"),
        ])
        assert pairwise_count(c, None, "entity") == 6

    def test_closed_form(self):
        docs = [doc_with_mentions(f"d{i}", "T", 100, gold_prefix=f"g{i}_")
                for i in range(10)]
        c = make_corpus(docs)
        assert pairwise_count(c, None, "entity") == 1000 * 999 // 2


class TestBoundCheck:
    def test_all_singletons_worst_case(self):
        # every prediction adds a cluster: step i sees i candidates incl. S
        m = 12
        trace = ScoreTrace()
        for i in range(1, m + 1):
            trace.record(i)
        report = sequential_bound_check(trace, n_clusters=m, n_mentions=m)
        assert report.invocations == m * (m + 1) // 2
        assert report.invocations <= report.bound

    def test_one_big_cluster_teacher_forced(self):
        """Teacher-forced single-cluster corpus: step 1 sees S only, later
        steps see the one cluster plus S, so invocations = 2m - 1."""
        docs = [
            {"doc_id": f"d{i}", "topic_gold": "T",
             "tokens": ["a", "b"],
             "mentions": [mention(f"d{i}_m0", start=0, end=0, gold="g"),
                          mention(f"d{i}_m1", start=1, end=1, gold="g")]}
            for i in range(3)
        ]
        c = make_corpus(docs)
        config = Config(d_tok=4, d_arg=2, k=1, d_p=2, d_f=2)
        params = ModelParams.init(config, seed=0)
        store = random_store(c, dim=4)
        result = run_corpus(c, store, params, "entity", teacher_forced=True)
        m = 6
        assert result.trace.invocations == 2 * m - 1

    def test_counter_log_disagreement_raises(self):
        trace = ScoreTrace(invocations=10, per_mention=[3, 3])
        with pytest.raises(BoundViolation):
            sequential_bound_check(trace, 5, 2)

    def test_bound_violation_raises(self):
        trace = ScoreTrace()
        trace.record(100)
        with pytest.raises(BoundViolation):
            sequential_bound_check(trace, n_clusters=1, n_mentions=2)

    def test_invocations_never_exceed_pairwise_plus_m(self):
        """Holds for any corpus; tight only for all-singleton single-topic."""
        rng = np.random.default_rng(5)
        config = Config(d_tok=4, d_arg=2, k=1, d_p=2, d_f=2)
        params = ModelParams.init(config, seed=0)
        for trial in range(6):
            n_docs = int(rng.integers(2, 5))
            docs = [
                doc_with_mentions(f"d{i}", f"T{i % 2}",
                                  int(rng.integers(1, 5)),
                                  gold_prefix=f"g{i}_")
                for i in range(n_docs)
            ]
            c = make_corpus(docs)
            store = random_store(c, dim=4, seed=trial)
            result = run_corpus(c, store, params, "entity")
            m = len(result.clustering)
            pw = pairwise_count(c, None, "entity")
            assert result.trace.invocations <= pw + m


class TestStreamingCost:
    def setup_run(self, n_docs=4, mentions_per_doc=5):
        docs = [
            doc_with_mentions(f"d{i}", "T", mentions_per_doc,
                              gold_prefix=f"g{i % 2}_")
            for i in range(n_docs)
        ]
        new = doc_with_mentions("zz", "T", 3, gold_prefix="g0_")
        full = make_corpus(docs + [new])
        config = Config(d_tok=4, d_arg=2, k=1, d_p=2, d_f=2)
        params = ModelParams.init(config, seed=1)
        store = random_store(full, dim=4)
        base = make_corpus(docs)
        result = run_corpus(base, store, params, "entity")
        return full, result.state, store, params

    def test_bounds_and_pairwise(self):
        full, state, store, params = self.setup_run()
        doc = full.document("zz")
        m_prior = len(state.clusters.assignment)
        costs = streaming_cost(state, doc, store, params)
        assert costs["ours"] <= costs["bound"]
        assert costs["pairwise"] == m_prior * 3 + 3
        assert costs["new_mentions"] == 3

    def test_empty_new_doc(self):
        full, state, store, params = self.setup_run()
        empty = make_corpus(
            [{"doc_id": "e", "topic_gold": "T", "tokens": ["x"], "mentions": []}]
        )
        estore = random_store(empty, dim=4)
        costs = streaming_cost(state, empty.documents[0], estore, params)
        assert costs["ours"] == 0
        assert costs["pairwise"] == 0

    def test_cost_independent_of_prior_mentions(self):
        """Same cluster count, doubled mention count: ours-cost unchanged."""
        full_a, state_a, store_a, params = self.setup_run(n_docs=2)
        full_b, state_b, store_b, _ = self.setup_run(n_docs=4)
        ca = {c.topic_id for c in state_a.clusters.clusters}
        # make cluster counts equal by construction check
        na = sum(1 for c in state_a.clusters.clusters if c.topic_id == "T")
        nb = sum(1 for c in state_b.clusters.clusters if c.topic_id == "T")
        doc_a = full_a.document("zz")
        doc_b = full_b.document("zz")
        cost_a = streaming_cost(state_a, doc_a, store_a, params)
        cost_b = streaming_cost(state_b, doc_b, store_b, params)
        if na == nb:
            assert cost_a["ours"] == cost_b["ours"]
        assert cost_b["prior_mentions"] > cost_a["prior_mentions"]
        assert cost_b["pairwise"] > cost_a["pairwise"]


class TestLemmaBaseline:
    def test_same_lemma_same_topic_clusters(self):
        docs = [
            {"doc_id": "d1", "topic_gold": "T",
             "tokens": ["many", "earthquakes"],
             "mentions": [mention("m1", start=1, end=1)]},
            {"doc_id": "d2", "topic_gold": "T",
             "tokens": ["an", "earthquake"],
             "mentions": [mention("m2", start=1, end=1)]},
        ]
        c = make_corpus(docs)
        table = {"earthquakes": "earthquake"}
        clust = lemma_baseline(c, None, "entity", lemma_table=table)
        assert clust["m1"] == clust["m2"]

    def test_same_lemma_different_topic_separate(self):
        docs = [
            {"doc_id": "d1", "topic_gold": "A", "tokens": ["quake"],
             "mentions": [mention("m1")]},
            {"doc_id": "d2", "topic_gold": "B", "tokens": ["quake"],
             "mentions": [mention("m2")]},
        ]
        c = make_corpus(docs)
        clust = lemma_baseline(c, None, "entity")
        assert clust["m1"] != clust["m2"]

    def test_no_shared_lemmas_all_singletons(self):
        c = make_corpus([doc_with_mentions("d1", "T", 5)])
        clust = lemma_baseline(c, None, "entity")
        assert len(clust.clusters()) == 5
