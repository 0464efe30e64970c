"""Coreference metrics against hand-derived and exhaustive oracles."""

import numpy as np
import pytest

from seqcoref.corpus import Clustering
from seqcoref.errors import UniverseMismatch
from seqcoref.metrics import (
    ScoreTriple,
    _exhaustive_alignment,
    b_cubed,
    ceaf_e,
    conll_f1,
    exclude_gold_singletons,
    max_weight_alignment,
    min_cost_assignment,
    muc,
    phi4,
    score_report,
)


def clustering(*groups):
    return Clustering({m: i for i, g in enumerate(groups) for m in g})


GOLD = clustering(("a", "b", "c"), ("d",))
PRED = clustering(("a", "b"), ("c", "d"))


class TestMuc:
    def test_identity(self):
        assert muc(GOLD, GOLD) == ScoreTriple(1.0, 1.0, 1.0)

    def test_canonical_example(self):
        t = muc(PRED, GOLD)
        assert (t.precision, t.recall, t.f1) == (0.5, 0.5, 0.5)

    def test_all_singleton_gold_flagged(self):
        g = clustering(("a",), ("b",))
        t = muc(g, g)
        assert not t.defined
        assert t.f1 == 0.0

    def test_universe_mismatch(self):
        with pytest.raises(UniverseMismatch):
            muc(clustering(("a", "b")), GOLD)


class TestBCubed:
    def test_identity(self):
        assert b_cubed(GOLD, GOLD) == ScoreTriple(1.0, 1.0, 1.0)

    def test_canonical_example(self):
        t = b_cubed(PRED, GOLD)
        assert t.precision == pytest.approx(0.75)
        assert t.recall == pytest.approx(2 / 3, abs=1e-5)
        assert t.f1 == pytest.approx(0.70588, abs=1e-5)

    def test_all_singletons_perfect(self):
        g = clustering(("a",), ("b",), ("c",))
        assert b_cubed(g, g).f1 == 1.0

    def test_refining_correct_cluster_lowers_recall(self):
        gold = clustering(("a", "b", "c", "d"))
        split = clustering(("a", "b"), ("c", "d"))
        assert b_cubed(split, gold).recall < b_cubed(gold, gold).recall


class TestCeafE:
    def test_identity(self):
        assert ceaf_e(GOLD, GOLD) == ScoreTriple(1.0, 1.0, 1.0)

    def test_canonical_example(self):
        t = ceaf_e(PRED, GOLD)
        assert t.precision == pytest.approx(0.73333, abs=1e-5)
        assert t.recall == pytest.approx(0.73333, abs=1e-5)

    def test_one_big_cluster(self):
        pred = clustering(("a", "b", "c", "d"))
        t = ceaf_e(pred, GOLD)
        assert t.recall == pytest.approx((6 / 7) / 2, abs=1e-6)
        assert t.precision == pytest.approx(6 / 7, abs=1e-6)

    def test_matches_exhaustive_on_random_instances(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n_gold = int(rng.integers(1, 7))
            n_pred = int(rng.integers(1, 7))
            w = rng.uniform(0, 1, size=(n_gold, n_pred))
            _, total = max_weight_alignment(w)
            assert total == pytest.approx(_exhaustive_alignment(w), abs=1e-9)


class TestHungarian:
    def test_simple_assignment(self):
        cost = np.array([[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]])
        pairs = min_cost_assignment(cost)
        total = sum(cost[r, c] for r, c in pairs)
        assert total == pytest.approx(5.0)  # 1 + 2 + 2

    def test_rectangular(self):
        w = np.array([[1.0, 9.0], [8.0, 2.0], [3.0, 3.0]])
        pairs, total = max_weight_alignment(w)
        assert total == pytest.approx(17.0)
        assert len(pairs) == 2

    def test_negative_entries(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            w = rng.uniform(-5, 5, size=(4, 4))
            _, total = max_weight_alignment(w)
            # exhaustive check maximizes even with negative weights chosen
            best = -np.inf
            from itertools import permutations

            for perm in permutations(range(4)):
                best = max(best, sum(w[i, j] for i, j in enumerate(perm)))
            assert total == pytest.approx(best, abs=1e-9)


class TestConll:
    def test_identity(self):
        assert conll_f1(GOLD, GOLD) == 1.0

    def test_canonical_example(self):
        assert conll_f1(PRED, GOLD) == pytest.approx(0.64640, abs=1e-5)

    def test_between_min_and_max(self):
        scores = [muc(PRED, GOLD).f1, b_cubed(PRED, GOLD).f1, ceaf_e(PRED, GOLD).f1]
        c = conll_f1(PRED, GOLD)
        assert min(scores) <= c <= max(scores)

    def test_relabeling_invariance(self):
        relabeled = Clustering({m: c + 17 for m, c in PRED.mapping.items()})
        assert conll_f1(relabeled, GOLD) == conll_f1(PRED, GOLD)


class TestReport:
    def test_report_shape(self):
        report = score_report(PRED, GOLD)
        assert set(report) == {"muc", "b3", "ceaf_e", "conll"}
        assert report["conll"] == pytest.approx(0.64640, abs=1e-5)

    def test_exclude_singletons(self):
        pred, gold = exclude_gold_singletons(PRED, GOLD)
        assert gold.mentions() == {"a", "b", "c"}
        assert pred.mentions() == {"a", "b", "c"}
        report = score_report(PRED, GOLD, exclude_singletons=True)
        assert 0.0 <= report["conll"] <= 1.0
